import math

import numpy as np
import numpy.testing as npt
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from reinhardt.control import E1, E2, E3, cost_rate, star_contains, velocity
from reinhardt.exceptions import StarExit
from reinhardt.geometry import I2, SQRT3, det, mobius, rpow, x_of_z
from reinhardt.links import (M2, M3, concat, control_of_rotation, gamma0, link_cost,
                             link_exit_time, link_group, link_params, link_state, rotated_link)

from conftest import star_points

times = st.floats(0.0, 1.0)


def test_link_state_from_i():
    for t in (0.0, 0.1, 0.3):
        s = math.exp(SQRT3 * t)
        expected = complex(-1 / SQRT3 + s / SQRT3, s)
        assert abs(link_state(1j, M3, t) - expected) < 1e-15


@given(star_points(), times)
def test_link_state_is_a_line(z, t):
    t = min(t, link_exit_time(z))
    c0, alpha = link_params(z, M3)
    w = link_state(z, M3, t)
    assert abs(w.imag - alpha * (w.real + M3)) <= 1e-12 * max(1, abs(w))


@given(star_points(), st.floats(0.0, 0.5))
def test_link_state_matches_velocity(z, t):
    t = min(t, 0.9 * link_exit_time(z))
    h = 1e-6
    d = (link_state(z, M3, t + h) - link_state(z, M3, t - h)) / (2 * h)
    v = velocity(link_state(z, M3, t), E3)
    npt.assert_allclose([d.real, d.imag], v, rtol=1e-5, atol=1e-6)


@given(star_points())
def test_alpha_signs(z):
    assert link_params(z, M3)[1] > 0
    assert link_params(z, M2)[1] < 0


@given(star_points(), times)
def test_link_group_det(z, t):
    npt.assert_allclose(link_group(z, M3, 0.0), I2)
    g = link_group(z, M3, min(t, link_exit_time(z)))
    assert abs(det(g) - 1) <= 1e-12 * max(1, np.abs(g).max() ** 2)


@given(star_points(), st.floats(0.01, 0.3), st.sampled_from([M2, M3]))
def test_link_group_solves_ode(z, t, m):
    h = 1e-6
    w = link_state(z, m, t)
    if not star_contains(w):
        return
    g = link_group(z, m, t)
    dg = (link_group(z, m, t + h) - link_group(z, m, t - h)) / (2 * h)
    X = x_of_z(link_state(z, m, t))
    assert np.abs(dg - g @ X).max() <= 1e-7 * max(1, np.abs(g @ X).max())


@given(star_points(), st.floats(0.0, 1.0))
def test_e2_link_matches_velocity(z, t):
    h = 1e-6
    w = link_state(z, M2, t)
    d = (link_state(z, M2, t + h) - link_state(z, M2, t - h)) / (2 * h)
    try:
        v = velocity(w, E2)
    except ArithmeticError:
        return
    npt.assert_allclose([d.real, d.imag], v, rtol=1e-6, atol=1e-6 * max(1, abs(w)))


def test_link_cost_examples(rng):
    assert link_cost(0.1 + 0.9j, M3, 0.0) == 0.0
    for _ in range(30):
        z = complex(rng.uniform(-0.5, 0.5), rng.uniform(0.7, 2.0))
        t = rng.uniform(0, 0.9) * link_exit_time(z)
        q, _ = quad(lambda s: cost_rate(link_state(z, M3, s)), 0, t, epsabs=1e-13, epsrel=1e-13)
        assert link_cost(z, M3, t) == pytest.approx(q, abs=1e-10)


@given(star_points(), st.floats(1e-3, 1.0))
def test_link_cost_monotone_and_bounded(z, t):
    t = min(t, link_exit_time(z))
    c1, c2 = link_cost(z, M3, t / 2), link_cost(z, M3, t)
    assert c2 > c1 > 0
    assert c2 >= 3 * t * (1 - 1e-12)


def test_rotated_link_piecewise():
    z, T1, T2 = 0.1 + 0.9j, 0.2, 0.5
    npt.assert_allclose(rotated_link(1, z, T1, T2, 0.1), I2)
    npt.assert_allclose(rotated_link(1, z, T1, T2, T1), I2)
    for i in range(-3, 4):
        lhs = rotated_link(i, z, T1, T2, 0.4)
        npt.assert_allclose(lhs, rpow(i) @ gamma0(z, 0.2) @ rpow(-i), atol=1e-12)
    end = rotated_link(2, z, T1, T2, T2)
    assert np.abs(rotated_link(2, z, T1, T2, 0.9) - end).max() <= 1e-12
    assert np.abs(rotated_link(2, z, T1, T2, T2 - 1e-13) - end).max() <= 1e-12
    with pytest.raises(ValueError):
        rotated_link(0, z, 0.5, 0.2, 0.3)


def test_control_of_rotation():
    npt.assert_array_equal(control_of_rotation(0), E3)
    for k in range(-6, 6):
        npt.assert_array_equal(control_of_rotation(k), control_of_rotation(k + 3))
    assert {tuple(control_of_rotation(k)) for k in (-1, 1)} == {tuple(E1), tuple(E2)}


@pytest.mark.parametrize("k", [-2, -1, 1, 2, 3])
def test_rotated_links_solve_state_ode(k):
    """The vertex assigned to ``k`` drives the rotated ``E3`` link."""
    z = 0.05 + 0.85j
    tr = concat([(k, 0.1)], z)
    for t in (0.02, 0.05, 0.08):
        h = 1e-6
        g, w, X = tr.state(t)
        dg = (tr.g(t + h) - tr.g(t - h)) / (2 * h)
        assert np.abs(dg - g @ X).max() <= 1e-7
        dz = (tr.z(t + h) - tr.z(t - h)) / (2 * h)
        npt.assert_allclose([dz.real, dz.imag], velocity(w, control_of_rotation(k)),
                            rtol=1e-6, atol=1e-7)


def test_e1_links_lie_on_circles_through_fixed_points():
    tr = concat([(2, 0.3)], 0.05 + 0.85j)
    inv = [(abs(z) ** 2 - 1 / 3) / z.imag for z in (tr.z(t) for t in np.linspace(0, 0.3, 31))]
    assert np.ptp(inv) <= 1e-10


def test_singleton_concat_is_rotated_link():
    z = 0.05 + 0.85j
    tr = concat([(1, 0.2)], z)
    npt.assert_allclose(tr.g_final, rotated_link(1, z, 0, 0.2, 0.2), atol=1e-15)
    assert tr.total_cost == pytest.approx(link_cost(z, M3, 0.2), rel=1e-15)


def test_octagon_x_continuity_and_cost(octagon):
    tr = octagon.trajectory
    for link, nxt in zip(tr.links[:-1], tr.links[1:]):
        X_end = link.local(link.duration)[2]
        X_start = nxt.local(0.0)[2]
        assert np.abs(X_end - X_start).max() <= 1e-10
        assert np.abs(link.local(link.duration)[0] - nxt.local(0.0)[0]).max() <= 1e-12
    for t in np.linspace(0, tr.t_final, 17):
        X = tr.X(t)
        assert abs(det(X) - 1) <= 1e-12 and abs(np.trace(X)) <= 1e-12
    q = sum(quad(lambda s: cost_rate(tr.z(s)), a, b, epsabs=1e-13, epsrel=1e-13)[0]
            for a, b in zip(tr.switch_times[:-1], tr.switch_times[1:]))
    assert tr.total_cost == pytest.approx(q, abs=1e-8)


def test_cost_additivity(octagon):
    sched = octagon.schedule
    full = concat(sched, octagon.trajectory.z0)
    head = concat(sched[:2], octagon.trajectory.z0)
    z_mid = head.links[-1].z_base
    z_next = mobius(rpow(sched[1][0] - sched[2][0]), link_state(z_mid, M3, sched[1][1]))
    tail = concat(sched[2:], z_next)
    assert abs(full.total_cost - head.total_cost - tail.total_cost) <= 1e-12


def test_concat_reports_star_exit():
    with pytest.raises(StarExit) as exc:
        concat([(0, 0.1), (-1, 5.0)], 0.78j)
    assert exc.value.link == 1
    with pytest.raises(ValueError):
        concat([(0, -0.1)], 1j)


def test_zero_duration_links_are_noops():
    z = 0.05 + 0.85j
    a = concat([(0, 0.1), (1, 0.0), (1, 0.1)], z)
    assert len(a.links) == 3
    assert a.t_final == pytest.approx(0.2)
