import math

import numpy as np
import numpy.testing as npt
import pytest
from hypothesis import given, strategies as st

from reinhardt.control import (CENTER, E1, E2, E3, VERTICES, as_control, coefficients,
                               control_matrix, control_residuals, cost_rate, curvature, delta,
                               denominator, rotate_control, segment, star_contains, velocity,
                               velocity_jacobian)
from reinhardt.exceptions import DegenerateDenominator
from reinhardt.geometry import J, SQRT3, mobius, mobius_jacobian, rot, rpow, x_of_z

from conftest import random_star_points, simplex_points, star_points


def test_control_matrix_examples():
    npt.assert_allclose(coefficients(CENTER), (0, -1 / 3, 1 / 3), atol=1e-16)
    npt.assert_allclose(control_matrix(CENTER), J / 3, atol=1e-16)
    npt.assert_allclose(coefficients(E1), (0, 1 / 3, 1))
    a, b, c = coefficients(E3)
    npt.assert_allclose((a, b, c), (-1 / SQRT3, -2 / 3, 0))
    assert b / (2 * a) == pytest.approx(1 / SQRT3)


@given(simplex_points())
def test_control_matrix_solves_defining_system(u):
    assert np.abs(control_residuals(u)).max() <= 1e-14
    assert np.trace(control_matrix(u)) == 0


@given(simplex_points(), simplex_points(), st.floats(0, 1))
def test_control_matrix_affine(u, v, s):
    lhs = control_matrix(segment(u, v, s))
    npt.assert_allclose(lhs, s * control_matrix(u) + (1 - s) * control_matrix(v), atol=1e-15)


def test_as_control_validates():
    npt.assert_array_equal(as_control([0, 0, 1]), E3)
    with pytest.raises(ValueError):
        as_control([0.5, 0.6, -0.1])
    with pytest.raises(ValueError):
        as_control([1, 0])


def test_delta_examples():
    assert delta(CENTER, J) == pytest.approx(3.0)
    npt.assert_allclose(delta(CENTER, J) * control_matrix(CENTER), J, atol=1e-15)
    assert np.trace(control_matrix(E3) @ J) == pytest.approx(-2 / 3)
    assert delta(E3, J) == pytest.approx(3.0)


def test_delta_degenerate_on_star_boundary():
    # E1 denominator b - c|z|^2 vanishes on |z|^2 = 1/3
    z = complex(0.2, math.sqrt(1 / 3 - 0.04))
    assert abs(denominator(z, E1)) < 1e-15
    with pytest.raises(DegenerateDenominator):
        delta(E1, x_of_z(z))
    with pytest.raises(DegenerateDenominator):
        velocity(z, E1)


def test_star_contains_examples():
    assert star_contains(1j, 0.0)
    assert not star_contains(0.6 + 0.1j, 0.0)
    assert not star_contains(0.5j, 0.0)
    assert star_contains(0.5 + 1j, 0.0) and not star_contains(0.5 + 1j, 0.1)


def test_velocity_examples():
    npt.assert_allclose(velocity(1j, CENTER), (0, 0), atol=1e-16)
    npt.assert_allclose(velocity(1j, E3), (1, SQRT3))


def test_trace_negative_inside_star(rng):
    for z in random_star_points(rng, 1000, margin=1e-6):
        X = x_of_z(z)
        for e in VERTICES:
            assert np.trace(control_matrix(e) @ X) < 0


def _in_hull(p, verts, tol):
    """Barycentric solve against a triangle; all weights >= -tol."""
    A = np.vstack([np.array(verts).T, np.ones(3)])
    w = np.linalg.solve(A, np.r_[p, 1.0])
    return (w >= -tol).all()


def test_velocity_in_convex_hull_of_vertex_velocities(rng):
    zs = random_star_points(rng, 1000)
    for z in zs:
        u = rng.dirichlet(np.ones(3))
        verts = [velocity(z, e) for e in VERTICES]
        assert _in_hull(velocity(z, u), verts, 1e-9)


def test_velocity_monotone_along_segments(rng):
    s = np.linspace(0, 1, 101)
    for z in random_star_points(rng, 100):
        u, v = rng.dirichlet(np.ones(3)), rng.dirichlet(np.ones(3))
        f = np.array([velocity(z, segment(u, v, si)) for si in s])
        for col in f.T:
            d = np.diff(col)
            assert (d >= -1e-12).all() or (d <= 1e-12).all()


@given(star_points(), simplex_points())
def test_velocity_jacobian_matches_finite_differences(z, u):
    h = 1e-6
    fd = np.array([(velocity(z + h, u) - velocity(z - h, u)) / (2 * h),
                   (velocity(z + 1j * h, u) - velocity(z - 1j * h, u)) / (2 * h)]).T
    Jv = velocity_jacobian(z, u)
    npt.assert_allclose(Jv, fd, rtol=1e-5, atol=1e-5 * max(1, np.abs(Jv).max()))


@given(star_points(), simplex_points(), st.integers(-5, 5))
def test_velocity_rotation_equivariance(z, u, k):
    w = mobius(rpow(k), z)
    lhs = velocity(w, rotate_control(u, k))
    rhs = mobius_jacobian(rpow(k), z) @ velocity(z, u)
    npt.assert_allclose(lhs, rhs, rtol=1e-9, atol=1e-9)


def test_cost_rate_examples():
    assert cost_rate(1j) == 3.0
    assert cost_rate(2j) == pytest.approx(15 / 4)


@given(star_points(margin=1e-6, y_max=10.0), st.floats(-10, 10))
def test_cost_rate_bound_and_so2_invariance(z, a):
    c = cost_rate(z)
    assert c >= 3.0
    assert cost_rate(mobius(rot(a), z)) == pytest.approx(c, rel=1e-10)


def test_curvature_examples():
    for i in range(3):
        assert curvature(1j, CENTER, i) == pytest.approx(1.0)
    assert curvature(1j, E3, 0) == 0.0


def test_curvature_nonnegative(rng):
    for z in random_star_points(rng, 300):
        u = rng.dirichlet(np.ones(3))
        for i in range(3):
            assert curvature(z, u, i) >= 0


def test_rotate_control_conjugates_control_matrix(rng):
    for k in range(-4, 5):
        u = rng.dirichlet(np.ones(3))
        lhs = control_matrix(rotate_control(u, k))
        npt.assert_allclose(lhs, rpow(k) @ control_matrix(u) @ rpow(-k), atol=1e-14)
    npt.assert_array_equal(rotate_control(E3, 1), E2)
    npt.assert_array_equal(rotate_control(E2, 1), E1)
