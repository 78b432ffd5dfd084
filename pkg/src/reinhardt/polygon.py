"""Smoothed regular 6k+2-gons and 6k-2-gons as periodic bang-bang trajectories."""

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .exceptions import BracketFailure, ClosureFailure
from .geometry import R, R_INV, SQRT3, hexagon_vertex, mobius
from .links import M3, concat, gamma0, link_cost

PLUS, MINUS = "plus", "minus"


@dataclass(frozen=True)
class PolygonFamily:
    """``tag='plus'`` gives the smoothed ``6k+2``-gon, ``'minus'`` the ``6k-2``-gon.

    ``k`` is normally an integer (``k >= 1`` for plus, ``k >= 2`` for minus);
    real ``k`` is accepted for interpolation diagnostics.
    """

    tag: str
    k: float

    def __post_init__(self):
        if self.tag not in (PLUS, MINUS):
            raise ValueError(f"unknown family {self.tag!r}")
        if self.k < 1 or (self.tag == MINUS and self.k <= 1):
            raise ValueError(f"k = {self.k} out of range for the {self.tag} family")

    @property
    def sign(self):
        return 1 if self.tag == PLUS else -1

    @property
    def n_links(self):
        n = 3 * self.k + self.sign
        return int(n) if n == int(n) else n

    @property
    def sides(self):
        return 6 * self.k + 2 * self.sign

    @property
    def theta(self):
        """Rotation angle of ``R^-+1 g_k``; ``pi k / (3k + 1)`` or ``pi k / (3k - 1)``."""
        return math.pi * self.k / (3 * self.k + self.sign)


def link_duration(y):
    """Time on one link: ``|ln((1 + 3y^2)/4)| / (sqrt3 y)``."""
    return abs(math.log((1 + 3 * y * y) / 4)) / (SQRT3 * y)


def _first_link(family, y):
    """Start point of the base ``E3`` link and its ``g`` after one link."""
    t = link_duration(y)
    if family.tag == PLUS:
        return 1j * y, gamma0(1j * y, t)
    z0 = mobius(R_INV, 1j * y)
    return z0, gamma0(z0, t)


def trace_residual(family, y):
    """``trace(R^-1 g_k) - 2 cos(theta_k)`` (plus) or ``trace(R g_k) - ...`` (minus)."""
    _, g = _first_link(family, y)
    M = R_INV if family.tag == PLUS else R
    return float(np.trace(M @ g)) - 2 * math.cos(family.theta)


def _scan_grid(family):
    # plus: z_k = i y below i, y in (1/sqrt3, 1), scanned downward from 1.
    # minus: above i, y > 1; the root runs off like (k - 1)^(-1/2) as k -> 1,
    # so y - 1 is scanned on a log grid.
    if family.tag == PLUS:
        return np.linspace(1 - 1e-12, 1 / SQRT3 + 1e-6, 801)
    return 1 + np.geomspace(1e-12, 1e4, 1601)


def solve_polygon_params(family, xtol=1e-15):
    """Solve the trace equation for ``y_k``; returns ``(y_k, t_k)``.

    The residual equals ``1 - 2 cos theta_k`` at ``y = 1``; the bracket is
    scanned outward from there and the first sign change is taken, which
    selects the eigenvalue branch with ``g_k`` closest to the identity. The
    root is refined by Brent's method and polished by one Newton step.

    Raises
    ------
    BracketFailure
        If the residual has no sign change on the scan grid.
    """
    grid = _scan_grid(family)
    vals = [trace_residual(family, y) for y in grid]
    for a, b, fa, fb in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
        if fa == 0:
            return float(a), link_duration(a)
        if fa * fb < 0:
            y = brentq(lambda v: trace_residual(family, v), min(a, b), max(a, b),
                       xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=200)
            y = _newton_polish(family, y)
            return y, link_duration(y)
    raise BracketFailure(f"no sign change of the trace residual for {family}")


def _newton_polish(family, y, h=1e-7):
    f = trace_residual(family, y)
    df = (trace_residual(family, y + h) - trace_residual(family, y - h)) / (2 * h)
    y1 = y - f / df
    return y1 if abs(trace_residual(family, y1)) <= abs(f) else y


def polygon_schedule(family, t_k):
    """``((0, t), (-1, t), ..., (-3k, t))`` for plus, ``((1, t), ..., (3k-1, t))`` for minus."""
    n = family.n_links
    if family.tag == PLUS:
        return tuple((-j, t_k) for j in range(n))
    return tuple((j, t_k) for j in range(1, n + 1))


@dataclass(frozen=True)
class SmoothedPolygon:
    family: PolygonFamily
    y_k: float
    t_k: float
    schedule: tuple
    trajectory: object

    @property
    def theta_k(self):
        return self.family.theta

    @property
    def t_f(self):
        return self.trajectory.t_final

    @property
    def z_start(self):
        """Half-plane point at ``t = 0`` (``i y_k`` for both families)."""
        return self.trajectory.z(0.0)

    @property
    def area(self):
        return self.trajectory.total_cost

    def closure_residuals(self):
        """``max |g(t_f) - R|`` and ``|z(t_f) - R^-1 . z(0)|``."""
        tr = self.trajectory
        return {
            "g": float(np.abs(tr.g_final - R).max()),
            "z": abs(tr.z_final - mobius(R_INV, self.z_start)),
            "trace": abs(trace_residual(self.family, self.y_k)),
        }

    def link_boundary_points(self):
        """Half-plane points at the switching times."""
        return [self.trajectory.z(t) for t in self.trajectory.switch_times]


def build_polygon(family, g_tol=1e-8, z_tol=1e-10):
    """Solve for ``(y_k, t_k)`` and assemble the periodic trajectory.

    Raises
    ------
    ClosureFailure
        If the periodic boundary conditions fail beyond ``g_tol`` / ``z_tol``.
    """
    if family.k != int(family.k):
        raise ValueError("only integer k closes up; use solve_polygon_params for real k")
    y, t = solve_polygon_params(family)
    z0 = 1j * y if family.tag == PLUS else mobius(R_INV, 1j * y)
    schedule = polygon_schedule(family, t)
    poly = SmoothedPolygon(family, y, t, schedule, concat(schedule, z0))
    res = poly.closure_residuals()
    if res["g"] > g_tol or res["z"] > z_tol:
        raise ClosureFailure(f"{family} does not close: {res}", res)
    return poly


def interpolated_area(family):
    """``n_links * link cost`` for real ``k`` without enforcing closure.

    For integer ``k`` this equals the polygon area; for real ``k`` it
    interpolates between family members (e.g. the ``k -> 1+`` limit of the minus
    family).
    """
    y, t = solve_polygon_params(family)
    z0 = 1j * y if family.tag == PLUS else mobius(R_INV, 1j * y)
    return family.n_links * link_cost(z0, M3, t)


def boundary_samples(p, per_link=64, trajectory=None):
    """Sample the six branches ``sigma_j(t) = g(t) e_j``.

    Returns an array of shape ``(6, N, 2)``; branch ``j`` runs over ``[0, t_f]``
    uniformly in ``t`` within each link.
    """
    tr = trajectory or p.trajectory
    ts = tr.sample(per_link)
    gs = np.array([tr.g(t) for t in ts])
    return np.stack([gs @ hexagon_vertex(j) for j in range(6)])


def closed_boundary(branches):
    """Concatenate the six branches into one closed polyline (last point dropped)."""
    return np.concatenate([b[:-1] for b in branches])


def shoelace_area(points):
    x, y = points[:, 0], points[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def polygon_area(p):
    """Area via the cost integral (sum of closed-form link costs)."""
    return p.area


def shoelace_polygon_area(p, n_samples=4096):
    """Area from the closed boundary polyline with about ``n_samples`` points."""
    per_link = max(1, math.ceil(n_samples / (6 * p.family.n_links)))
    return shoelace_area(closed_boundary(boundary_samples(p, per_link)))


def turning_cross_products(branches):
    """Cross products of consecutive chords along each branch (>= 0 if convex)."""
    d = np.diff(branches, axis=1)
    return d[:, :-1, 0] * d[:, 1:, 1] - d[:, :-1, 1] * d[:, 1:, 0]


def octagon_area_closed_form():
    """``(8 - 4 sqrt2 - ln 2) / (2 sqrt2 - 1) * sqrt12``."""
    r2 = math.sqrt(2)
    return (8 - 4 * r2 - math.log(2)) / (2 * r2 - 1) * math.sqrt(12)

