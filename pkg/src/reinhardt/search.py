"""Direct search over PMP initial conditions by bang-bang shooting.

A lifted initial condition ``(lambda_cost = -1, Lambda(0), z(0), nu(0))`` with
``g(0) = I`` is constrained by ``H = 0`` (maximized Hamiltonian) and
``nu2 = 0`` (``t = 0`` is a switching time between ``E2`` and ``E3``). The
chart below keeps two entries of ``Lambda``, ``z`` and ``nu1`` as offsets from
an anchor and solves ``H(E3) = 0`` for the remaining ``Lambda`` entry.

Fixing ``lambda_cost = -1`` instead of projectivizing leaves abnormal
extremals outside the chart.
"""

import csv
import io
import itertools
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.integrate import solve_ivp

from .control import E3, VERTICES, coefficients, star_margin
from .costate import Costate, LiftedState, hamiltonian, lifted_rhs, pack
from .exceptions import ChartFailure, DegenerateDenominator
from .geometry import J, R, R_INV, mobius

TERMINAL_HIT = "TerminalHit"
COST_BOUND_REJECT = "CostBoundReject"
SINGULAR_NEIGHBORHOOD = "SingularNeighborhood"
STAR_EXIT = "StarExit"
SWITCH_OVERFLOW = "SwitchOverflow"
KINDS = (TERMINAL_HIT, COST_BOUND_REJECT, SINGULAR_NEIGHBORHOOD, STAR_EXIT, SWITCH_OVERFLOW)

LAMBDA_SING = -1.5 * J


@dataclass(frozen=True)
class ReducedInitial:
    """Five chart coordinates ``(dL_a, dL_b, dx, dy, dnu1)``."""

    coords: tuple

    def __post_init__(self):
        c = tuple(float(v) for v in self.coords)
        if len(c) != 5:
            raise ValueError("a reduced initial condition has five coordinates")
        object.__setattr__(self, "coords", c)

    def __iter__(self):
        return iter(self.coords)

    def as_array(self):
        return np.array(self.coords)


@dataclass(frozen=True)
class Chart:
    """Affine chart around an anchor ``(Lambda_a, z_a, nu1_a)``.

    ``solved`` is the index (0: L11, 1: L12, 2: L21) of the ``Lambda`` entry
    eliminated through ``H(E3) = 0``; it is the entry with the largest
    coefficient at the anchor.
    """

    Lambda: tuple
    z: complex
    nu1: float
    solved: int

    @property
    def free(self):
        return tuple(i for i in range(3) if i != self.solved)

    @classmethod
    def at(cls, s):
        s = _normalized(s)
        coef = np.abs(_lambda_coefficients(s.z))
        L = s.Lambda
        return cls((L[0, 0], L[0, 1], L[1, 0]), s.z, float(s.nu[0]), int(np.argmax(coef)))


def _lambda_coefficients(z):
    """``dH/d(L11, L12, L21)``; ``H`` is affine in ``Lambda``."""
    x, y = z.real, z.imag
    return np.array([2 * x / y, 1 / y, -(x * x + y * y) / y])


def _normalized(s):
    lc = s.lambda_cost
    if not lc < 0:
        raise ChartFailure("the chart needs a normal multiplier lambda_cost < 0")
    return s.with_costate(s.costate.scaled(1.0 / abs(lc)))


@lru_cache(maxsize=1)
def octagon_chart():
    """Chart anchored at the smoothed octagon's solved initial costate."""
    return Chart.at(octagon_initial_state())


@lru_cache(maxsize=1)
def _octagon_state():
    from .pmp import solve_costate_bvp
    from .polygon import PLUS, PolygonFamily, build_polygon
    p = build_polygon(PolygonFamily(PLUS, 1))
    return LiftedState(np.eye(2), p.trajectory.z(0.0), solve_costate_bvp(p)), p.area


def octagon_initial_state():
    return _octagon_state()[0]


def octagon_cost():
    return _octagon_state()[1]


def embed(r, chart=None):
    """Lifted state at ``t = 0`` (``g = I``, ``lambda_cost = -1``, ``nu2 = 0``).

    Raises
    ------
    ChartFailure
        If ``z`` leaves the upper half-plane or the eliminated coefficient vanishes.
    """
    chart = chart or octagon_chart()
    d = r.as_array()
    z = chart.z + complex(d[2], d[3])
    if not z.imag > 0:
        raise ChartFailure(f"z = {z} is not in the upper half-plane")
    L = list(chart.Lambda)
    i, j = chart.free
    L[i] += d[0]
    L[j] += d[1]
    coef = _lambda_coefficients(z)
    if abs(coef[chart.solved]) < 1e-12:
        raise ChartFailure("H = 0 cannot be solved for the chosen Lambda entry")
    L[chart.solved] = 0.0
    nu = (chart.nu1 + d[4], 0.0)
    s = LiftedState(np.eye(2), z, Costate.from_vector([*L, *nu, -1.0]))
    try:
        h = hamiltonian(s, E3)
    except DegenerateDenominator as exc:
        raise ChartFailure(str(exc)) from exc
    L[chart.solved] = -h / coef[chart.solved]
    return LiftedState(np.eye(2), z, Costate.from_vector([*L, *nu, -1.0]))


def reduce(s, chart=None, tol=1e-10):
    """Chart coordinates of ``s`` after rescaling to ``lambda_cost = -1``.

    Raises
    ------
    ChartFailure
        If ``s`` violates ``H(E3) = 0`` or ``nu2 = 0`` beyond ``tol``, or the
        multiplier is not normal.
    """
    chart = chart or octagon_chart()
    s = _normalized(s)
    if abs(s.nu[1]) > tol:
        raise ChartFailure(f"nu2 = {s.nu[1]:.3e} is not zero")
    h = hamiltonian(s, E3)
    if abs(h) > tol:
        raise ChartFailure(f"H(E3) = {h:.3e} is not zero")
    L = s.Lambda
    v = (L[0, 0], L[0, 1], L[1, 0])
    i, j = chart.free
    dz = s.z - chart.z
    return ReducedInitial((v[i] - chart.Lambda[i], v[j] - chart.Lambda[j],
                           dz.real, dz.imag, s.nu[0] - chart.nu1))


@dataclass(frozen=True)
class ShootOptions:
    eps_sing: float = 1e-3
    n_max: int = 64
    terminal_tol: float = 1e-6
    star_margin: float = 1e-6
    t_max: float = math.pi / 3
    rtol: float = 1e-10
    atol: float = 1e-12
    tie_tol: float = 1e-12


@dataclass
class ShootOutcome:
    kind: str
    t_end: float
    cost: float
    switch_times: list
    controls: list
    terminal_residuals: tuple
    hamiltonian_sup: float = 0.0
    ties: list = field(default_factory=list)

    @property
    def n_links(self):
        return len(self.controls)

    def to_dict(self):
        return {"kind": self.kind, "t_end": self.t_end, "cost": self.cost,
                "switch_times": list(self.switch_times), "controls": list(self.controls),
                "terminal_residuals": list(self.terminal_residuals),
                "hamiltonian_sup": self.hamiltonian_sup, "ties": list(self.ties)}


def _vertex_h(Y, lc):
    x, y, p, q, r, n1, n2 = Y[4], Y[5], Y[6], Y[7], Y[8], Y[9], Y[10]
    rho2 = x * x + y * y
    h0 = (2 * p * x + q - r * rho2) / y + 1.5 * lc * (1 + rho2) / y
    out = []
    for a, b, c in _ABC:
        d = b + 2 * a * x - c * rho2
        # only reached outside the star region; keeps event root finding finite
        if abs(d) < 1e-12:
            d = math.copysign(1e-12, d)
        out.append(h0 + n1 * y * (d + 2 * c * y * y) / d + n2 * 2 * (a - c * x) * y * y / d)
    return out


_ABC = tuple(coefficients(e) for e in VERTICES)


def _singular_distance(Y):
    dL = (Y[6] - LAMBDA_SING[0, 0], Y[7] - LAMBDA_SING[0, 1], Y[8] - LAMBDA_SING[1, 0])
    return math.sqrt(sum(v * v for v in dL) + Y[9] ** 2 + Y[10] ** 2
                     + Y[4] ** 2 + (Y[5] - 1) ** 2)


def _terminal_residuals(Y, z0):
    g = np.array([[Y[0], Y[1]], [Y[2], Y[3]]])
    zr = abs(complex(Y[4], Y[5]) - mobius(R_INV, z0))
    return float(np.abs(g - R).max()), float(zr)


def _initial_vertex(Y, lc, tol):
    h = _vertex_h(Y, lc)
    best = max(h)
    # ties at the start (nu2 = 0 makes E2 and E3 tie) resolve to E3
    return 2 if h[2] >= best - tol else int(np.argmax(h))


def shoot(r, opts=None, chart=None, state=None):
    """Integrate the extremal from ``embed(r)`` with PMP-maximizing vertex controls.

    The active vertex changes when a switching function ``H(active) - H(other)``
    crosses zero (located by the integrator's event root finder). Terminal
    conditions ``g = R``, ``z = R^-1.z(0)`` are tested at every switching time.
    ``state`` bypasses the chart and shoots from a given lifted state.
    """
    opts = opts or ShootOptions()
    s = state if state is not None else embed(r, chart)
    lc = s.lambda_cost
    z0 = s.z
    Y = pack(s)
    t = 0.0
    switch_times, controls, ties = [], [], []
    h_sup = 0.0

    def outcome(kind, Yend, tend):
        return ShootOutcome(kind, float(tend), float(Yend[11]), switch_times, controls,
                            _terminal_residuals(Yend, z0), h_sup, ties)

    if _singular_distance(Y) <= opts.eps_sing:
        return outcome(SINGULAR_NEIGHBORHOOD, Y, t)
    if star_margin(s.z) <= opts.star_margin:
        return outcome(STAR_EXIT, Y, t)
    active = _initial_vertex(Y, lc, opts.tie_tol)
    while True:
        controls.append(active)
        abc = _ABC[active]
        others = [j for j in range(3) if j != active]

        def sw(j):
            def ev(_t, Yv):
                h = _vertex_h(Yv, lc)
                return h[active] - h[j]
            ev.terminal, ev.direction = True, -1
            return ev

        def star(_t, Yv):
            return star_margin(complex(Yv[4], Yv[5])) - opts.star_margin
        star.terminal, star.direction = True, -1

        def sing(_t, Yv):
            return _singular_distance(Yv) - opts.eps_sing
        sing.terminal, sing.direction = True, -1

        events = [sw(j) for j in others] + [star, sing]
        try:
            sol = solve_ivp(lambda _t, Yv: lifted_rhs(Yv, abc, lc), (t, opts.t_max), Y,
                            method="RK45", rtol=opts.rtol, atol=opts.atol, events=events)
        except DegenerateDenominator:
            return outcome(STAR_EXIT, Y, t)
        for Yk in sol.y.T:
            h_sup = max(h_sup, abs(_vertex_h(Yk, lc)[active]))
        if sol.status == 0:
            return outcome(COST_BOUND_REJECT, sol.y[:, -1], sol.t[-1])
        fired = [i for i, te in enumerate(sol.t_events) if len(te)]
        i = fired[0]
        t = float(sol.t_events[i][0])
        Y = sol.y_events[i][0]
        if i == 2:
            return outcome(STAR_EXIT, Y, t)
        if i == 3:
            return outcome(SINGULAR_NEIGHBORHOOD, Y, t)
        switch_times.append(t)
        gres, zres = _terminal_residuals(Y, z0)
        if gres <= opts.terminal_tol and zres <= opts.terminal_tol:
            return outcome(TERMINAL_HIT, Y, t)
        if len(switch_times) > opts.n_max:
            return outcome(SWITCH_OVERFLOW, Y, t)
        h = _vertex_h(Y, lc)
        new = others[i]
        third = others[1 - i]
        if abs(h[third] - h[new]) <= opts.tie_tol:
            # all three vertices tie: an edge of the simplex; keep the crossing vertex
            ties.append(t)
        active = new


def _shoot_at(args):
    r, opts = args
    try:
        return shoot(ReducedInitial(r), opts)
    except ChartFailure:
        return ShootOutcome(STAR_EXIT, 0.0, 0.0, [], [], (math.inf, math.inf))


def grid_points(lo, hi, resolution):
    """Grid in ``[lo, hi]`` (five coordinates) enumerated in index order.

    ``resolution`` is an int or five ints. A zero-width side gives one point.
    An inverted side or a zero resolution gives an empty grid.
    """
    lo, hi = np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)
    res = np.broadcast_to(np.asarray(resolution, dtype=int), (5,))
    if (hi < lo).any() or (res <= 0).any():
        return []
    axes = [np.array([a]) if a == b else np.linspace(a, b, n) for a, b, n in zip(lo, hi, res)]
    return [tuple(float(v) for v in pt) for pt in itertools.product(*axes)]


def grid_search(lo, hi, resolution, opts=None, workers=1):
    """Shoot from every grid point; rows are ordered by grid index.

    With ``workers > 1`` the shots run in a process pool; the result does not
    depend on the worker count because ``map`` preserves the input order.

    Returns
    -------
    list of (index, ReducedInitial coordinates, ShootOutcome)
    """
    opts = opts or ShootOptions()
    pts = grid_points(lo, hi, resolution)
    if not pts:
        return []
    octagon_chart()
    jobs = [(p, opts) for p in pts]
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            outs = list(ex.map(_shoot_at, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        outs = [_shoot_at(j) for j in jobs]
    return [(i, p, o) for i, (p, o) in enumerate(zip(pts, outs))]


def best_hit(table):
    hits = [row for row in table if row[2].kind == TERMINAL_HIT]
    return min(hits, key=lambda row: (row[2].cost, row[0])) if hits else None


def octagon_box(half_width=1e-3, chart=None):
    """Box of the given half-width centred on the octagon's reduced initial condition."""
    c = reduce(octagon_initial_state(), chart).as_array()
    return c - half_width, c + half_width


def _g(v):
    return format(v, ".17g")


CSV_COLUMNS = ["index", "r1", "r2", "r3", "r4", "r5", "kind", "t_end", "cost",
               "n_links", "g_residual", "z_residual", "switch_times"]


def table_to_csv(table):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for i, r, o in table:
        w.writerow([i, *map(_g, r), o.kind, _g(o.t_end), _g(o.cost), o.n_links,
                    _g(o.terminal_residuals[0]), _g(o.terminal_residuals[1]),
                    ";".join(_g(t) for t in o.switch_times)])
    return buf.getvalue()


def table_to_json(table):
    rows = [{"index": i, "r": [float(v) for v in r], **o.to_dict()} for i, r, o in table]
    return json.dumps({"schema": "reinhardt-search/1", "rows": rows}, indent=1)


__all__ = [
    "KINDS", "TERMINAL_HIT", "COST_BOUND_REJECT", "SINGULAR_NEIGHBORHOOD", "STAR_EXIT",
    "SWITCH_OVERFLOW", "ReducedInitial", "Chart", "octagon_chart", "octagon_initial_state",
    "octagon_cost", "embed", "reduce", "ShootOptions", "ShootOutcome", "shoot",
    "grid_points", "grid_search", "best_hit", "octagon_box", "table_to_csv", "table_to_json",
]
