import math

import numpy as np
import numpy.testing as npt
import pytest

from reinhardt.control import star_margin
from reinhardt.exceptions import BracketFailure
from reinhardt.geometry import R_INV, SQRT3, hexagon_vertex, mobius, rpow
from reinhardt.polygon import (MINUS, PLUS, PolygonFamily, boundary_samples, build_polygon,
                               closed_boundary, interpolated_area, link_duration,
                               octagon_area_closed_form, polygon_area, polygon_schedule,
                               shoelace_area, shoelace_polygon_area, solve_polygon_params,
                               trace_residual, turning_cross_products)

FAMILIES = [(PLUS, k) for k in range(1, 13)] + [(MINUS, k) for k in range(2, 13)]


def test_family_validation():
    with pytest.raises(ValueError):
        PolygonFamily(PLUS, 0)
    with pytest.raises(ValueError):
        PolygonFamily(MINUS, 1)
    with pytest.raises(ValueError):
        PolygonFamily("square", 2)
    f = PolygonFamily(PLUS, 3)
    assert (f.n_links, f.sides, f.sign) == (10, 20, 1)
    g = PolygonFamily(MINUS, 3)
    assert (g.n_links, g.sides, g.sign) == (8, 16, -1)


@pytest.mark.parametrize("k", range(1, 9))
def test_plus_theta_and_bracket(k):
    f = PolygonFamily(PLUS, k)
    assert f.theta == math.pi * k / (3 * k + 1)
    y, t = solve_polygon_params(f)
    assert 1 / SQRT3 < y < 1
    assert 2 * math.sqrt(2) - 1e-12 <= 1 + 3 * y * y <= 4


def test_octagon_parameters():
    y, t = solve_polygon_params(PolygonFamily(PLUS, 1))
    # the trace condition reduces to 1 + 3 y^2 = 2 sqrt2 for k = 1
    assert 1 + 3 * y * y == pytest.approx(2 * math.sqrt(2), abs=1e-12)
    assert t == pytest.approx(math.log(math.sqrt(2)) / (SQRT3 * y), rel=1e-12)
    assert abs(trace_residual(PolygonFamily(PLUS, 1), y)) <= 1e-10


@pytest.mark.parametrize("tag,k", FAMILIES)
def test_trace_and_duration_residuals(tag, k):
    f = PolygonFamily(tag, k)
    y, t = solve_polygon_params(f)
    assert abs(trace_residual(f, y)) <= 1e-12
    assert abs(t - abs(math.log((1 + 3 * y * y) / 4)) / (SQRT3 * y)) <= 1e-12


@pytest.mark.parametrize("tag,k", FAMILIES)
def test_closure(tag, k, polygons):
    p = polygons(tag, k)
    res = p.closure_residuals()
    assert res["g"] <= 1e-8
    assert res["z"] <= 1e-10
    assert p.t_f == pytest.approx(p.family.n_links * p.t_k)
    assert abs(p.z_start - 1j * p.y_k) <= 1e-14
    assert min(star_margin(p.trajectory.z(t)) for t in p.trajectory.sample(8)) > 0


def test_schedules():
    assert polygon_schedule(PolygonFamily(PLUS, 1), 0.5) == ((0, 0.5), (-1, 0.5), (-2, 0.5),
                                                             (-3, 0.5))
    assert polygon_schedule(PolygonFamily(MINUS, 2), 0.5) == tuple((j, 0.5) for j in range(1, 6))


def test_octagon_has_four_links(octagon):
    assert len(octagon.trajectory.links) == 4


@pytest.mark.parametrize("tag,k", [(PLUS, 1), (PLUS, 2), (MINUS, 2), (MINUS, 3)])
def test_switch_points_trace_a_triangle(tag, k, polygons):
    p = polygons(tag, k)
    pts = p.link_boundary_points()
    step = -1 if tag == PLUS else 1
    for j, z in enumerate(pts):
        assert abs(z - mobius(rpow(step * j), p.z_start)) <= 1e-10
    tri = np.array([[z.real, z.imag] for z in pts[:3]])
    # counterclockwise for plus, clockwise for minus
    assert np.sign(shoelace_area(tri)) == (1 if tag == PLUS else -1)


@pytest.mark.parametrize("tag,k", [(PLUS, 1), (PLUS, 3), (MINUS, 2)])
def test_boundary_symmetries(tag, k, polygons):
    p = polygons(tag, k)
    b = boundary_samples(p, per_link=32)
    npt.assert_allclose(b[0, 0], [1.0, 0.0], atol=1e-15)
    for j in range(6):
        npt.assert_allclose(b[j, 0], hexagon_vertex(j), atol=1e-15)
    assert np.abs(b[3:] + b[:3]).max() <= 1e-12
    for j in range(6):
        assert np.abs(b[j, -1] - b[(j + 1) % 6, 0]).max() <= 1e-8
    assert turning_cross_products(b).min() >= -1e-9


def test_octagon_area_oracles(octagon):
    exact = octagon_area_closed_form()
    assert exact == pytest.approx(3.1260544288436685, abs=1e-15)
    a_cost = polygon_area(octagon)
    a_shoe = shoelace_polygon_area(octagon, 4096)
    assert a_cost == pytest.approx(exact, abs=1e-10)
    assert a_shoe == pytest.approx(a_cost, rel=1e-4)
    assert round(a_cost, 4) == 3.1261


def test_shoelace_converges_under_refinement(octagon):
    errs = [abs(shoelace_polygon_area(octagon, n) - octagon.area) for n in (256, 1024, 4096)]
    assert errs[0] > errs[1] > errs[2]


def test_shoelace_orientation():
    sq = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float)
    assert shoelace_area(sq) == 1.0
    assert shoelace_area(sq[::-1]) == -1.0
    b = np.stack([np.array([[np.cos(a), np.sin(a)] for a in np.linspace(s, s + np.pi / 3, 50)])
                  for s in np.arange(6) * np.pi / 3])
    assert shoelace_area(closed_boundary(b)) == pytest.approx(np.pi, rel=1e-3)


def test_areas_monotone_toward_pi(polygons):
    plus = [polygons(PLUS, k).area for k in range(1, 9)]
    minus = [polygons(MINUS, k).area for k in range(2, 9)]
    assert all(a < b for a, b in zip(plus, plus[1:])) and max(plus) < math.pi
    assert all(a > b for a, b in zip(minus, minus[1:])) and min(minus) > math.pi


def test_interpolated_area_matches_integer_members(polygons):
    for tag, k in [(PLUS, 2), (MINUS, 3)]:
        assert interpolated_area(PolygonFamily(tag, k)) == pytest.approx(polygons(tag, k).area,
                                                                         rel=1e-12)


def test_minus_family_degenerates_to_rectangle():
    areas = [interpolated_area(PolygonFamily(MINUS, 1 + e)) for e in (1e-1, 1e-2, 1e-3, 1e-4)]
    gaps = [math.sqrt(12) - a for a in areas]
    assert all(g1 > g2 > 0 for g1, g2 in zip(gaps, gaps[1:]))
    assert gaps[-1] < 5e-3


def test_noninteger_k_does_not_build():
    with pytest.raises(ValueError):
        build_polygon(PolygonFamily(PLUS, 1.5))


def test_link_duration_vanishes_at_i():
    assert link_duration(1.0) == 0.0
    assert link_duration(1 / SQRT3) == pytest.approx(math.log(2), rel=1e-12)


def test_bracket_failure(monkeypatch):
    import reinhardt.polygon as poly
    monkeypatch.setattr(poly, "trace_residual", lambda f, y: 1.0)
    with pytest.raises(BracketFailure):
        poly.solve_polygon_params(PolygonFamily(PLUS, 1))


def test_minus_start_is_rotated_base(polygons):
    p = polygons(MINUS, 2)
    assert abs(p.trajectory.links[0].z_base - mobius(R_INV, 1j * p.y_k)) <= 1e-14
