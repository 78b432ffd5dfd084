"""Pontryagin extremality of the smoothed polygons and the octagon's local quadratic.

The costate on one link is fixed by a homogeneous linear system in
``(Lambda(0), nu(0), lambda_cost)``. With ``rho`` the rotation carrying a link
to the next one (``R^-1`` for the plus family, ``R`` for the minus family)::

    Lambda(t_k) = rho Lambda(0) rho^-1       (3 equations, rank 2)
    F^T nu(t_k) = nu(0),  F = d(rho.)_{z(0)}  (2 equations)
    H(lambda(0), u_active) = 0               (1 equation)

The null space is one-dimensional. Its sign is fixed by asking the active
vertex to maximize ``H`` inside the link; the sign of ``lambda_cost`` is then
forced, normal (negative) for ``6k+2``-gons and positive for ``6k-2``-gons.
"""

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .control import E2, E3, VERTICES, coefficients
from .costate import Costate, LiftedState, flow_matrix, hamiltonian, propagate, switching
from .costate import nu2_singular_link, singular_state
from .exceptions import NewtonDivergence, SingularSystem
from .geometry import R, R_INV, SQRT3, mobius, mobius_jacobian
from .links import concat, control_of_rotation
from .polygon import PLUS, PolygonFamily, build_polygon, link_duration

RANK_TOL = 1e-9
BVP_RTOL = 1e-12
BVP_ATOL = 1e-13

NORMAL, ABNORMAL, WRONG_SIGN = "normal", "abnormal", "wrong_sign"


def ad_matrix(rho):
    """Matrix of ``L -> rho L rho^-1`` on the coordinates ``(L11, L12, L21)``."""
    rho_inv = np.linalg.inv(rho)
    cols = []
    for j in range(3):
        e = np.zeros(6)
        e[j] = 1.0
        M = rho @ Costate.from_vector(e).Lambda @ rho_inv
        cols.append([M[0, 0], M[0, 1], M[1, 0]])
    return np.array(cols).T


def _first_link(tag, y_k):
    """``(z(0), active control, rho, t_k)`` of the first link of a polygon."""
    t_k = link_duration(y_k)
    if tag == PLUS:
        return 1j * y_k, E3, R_INV, t_k
    return 1j * y_k, E2, R, t_k


def bvp_matrix(z0, u, rho, t_k):
    """The 6x6 homogeneous system acting on :meth:`Costate.vector`."""
    Phi = flow_matrix(z0, u, t_k, rtol=BVP_RTOL, atol=BVP_ATOL)
    F = mobius_jacobian(rho, z0)
    A = np.zeros((6, 6))
    A[0:3] = Phi[0:3]
    A[0:3, 0:3] -= ad_matrix(rho)
    A[3:5] = F.T @ Phi[3:5]
    A[3:5, 3:5] -= np.eye(2)
    for j in range(6):
        e = np.zeros(6)
        e[j] = 1.0
        A[5, j] = hamiltonian(LiftedState(np.eye(2), z0, Costate.from_vector(e)), u)
    return A


def _dominance_gap(s, u):
    """``H(u) - max H(other vertex)`` at ``s``."""
    i = int(np.argmax(u))
    H = [hamiltonian(s, e) for e in VERTICES]
    return H[i] - max(H[j] for j in range(3) if j != i)


def solve_link_costate(tag, y_k, rank_tol=RANK_TOL):
    """Costate at ``t = 0`` for the first link with parameter ``y_k``.

    Works for any ``y_k`` (the one-link system never uses the trace equation),
    which is what the positivity diagnostic :func:`f_triangle` needs.

    Returns
    -------
    costate : Costate
        Scaled so that ``|lambda_cost| = 1`` (unit norm if abnormal).
    singular_values : ndarray
        Singular values of the system matrix divided by the largest.

    Raises
    ------
    SingularSystem
        If the null space is not one-dimensional at ``rank_tol``.
    """
    z0, u, rho, t_k = _first_link(tag, y_k)
    A = bvp_matrix(z0, u, rho, t_k)
    _, S, Vt = np.linalg.svd(A)
    sv = S / S[0]
    if sv[-2] < rank_tol:
        raise SingularSystem(f"costate system has a null space of dimension > 1: {sv}")
    if sv[-1] > rank_tol:
        raise SingularSystem(f"costate system has only the trivial solution: {sv}")
    v = Vt[-1]
    probe = LiftedState(np.eye(2), z0, Costate.from_vector(v))
    mid = propagate(probe, [(u, t_k / 2)], rtol=BVP_RTOL, atol=BVP_ATOL, margin=None).final
    if _dominance_gap(mid, u) < 0:
        v = -v
    lc = v[5]
    if abs(lc) > rank_tol * np.abs(v).max():
        v = v / abs(lc)
    else:
        v = v / np.linalg.norm(v)
    return Costate.from_vector(v), sv


def solve_costate_bvp(p):
    """Initial costate of a built :class:`~reinhardt.polygon.SmoothedPolygon`."""
    return solve_link_costate(p.family.tag, p.y_k)[0]


def multiplier_sign(costate, tol=1e-12):
    lc = costate.lambda_cost
    if abs(lc) <= tol * max(1.0, np.abs(costate.vector()).max()):
        return ABNORMAL
    return NORMAL if lc < 0 else WRONG_SIGN


# --- vectorized evaluation on integrator output -----------------------------

def vertex_hamiltonians_array(Y, lambda_cost):
    """``H`` at ``E1, E2, E3`` for rows of packed states; shape ``(n, 3)``."""
    Y = np.atleast_2d(Y)
    x, y = Y[:, 4], Y[:, 5]
    p, q, r = Y[:, 6], Y[:, 7], Y[:, 8]
    n1, n2 = Y[:, 9], Y[:, 10]
    rho2 = x * x + y * y
    h0 = (2 * p * x + q - r * rho2) / y + 1.5 * lambda_cost * (1 + rho2) / y
    out = np.empty((len(Y), 3))
    for i, e in enumerate(VERTICES):
        a, b, c = coefficients(e)
        d = b + 2 * a * x - c * x * x - c * y * y
        f1 = y * (d + 2 * c * y * y) / d
        f2 = 2 * (a - c * x) * y * y / d
        out[:, i] = h0 + n1 * f1 + n2 * f2
    return out


def _dense(tr, t):
    """Packed states at times ``t`` from a :class:`~reinhardt.costate.Trace`."""
    t = np.asarray(t, dtype=float)
    out = np.empty((len(t), 12))
    for t0, t1, _, sol in tr.segments:
        m = (t >= t0) & (t <= t1)
        if m.any():
            out[m] = sol(t[m]).T
    return out


@dataclass
class ExtremalityReport:
    """Outcome of :func:`verify_extremal`; all fields are JSON-serializable."""

    family: str
    k: float
    lambda_cost: float
    lambda_cost_sign: str
    hamiltonian_sup_norm: float
    switching_margins: list
    endpoint_gaps: list
    transversality_residuals: dict
    time_symmetry_residual: float
    nu2_min: float
    nu2_interior_zeros: int
    costate_norm: float
    verdict: str
    reasons: list = field(default_factory=list)
    tolerances: dict = field(default_factory=dict)

    @property
    def passed(self):
        return self.verdict == "pass"

    def to_dict(self):
        return asdict(self)

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)


def verify_extremal(p, costate=None, grid=10_000, hamiltonian_tol=1e-8,
                    transversality_tol=1e-8, symmetry_tol=1e-8, nu2_tol=1e-10):
    """Check the maximum principle along one full period of polygon ``p``.

    Parameters
    ----------
    p : SmoothedPolygon
    costate : Costate, optional
        Initial costate; solved with :func:`solve_costate_bvp` if omitted.
    grid : int
        Interior sample count per link for the dominance and ``nu2`` checks.

    Notes
    -----
    Checks performed: ``|H| <= hamiltonian_tol`` over the period; on each link
    the active vertex strictly dominates the other two at every interior grid
    point; transversality at ``t_f`` (``Lambda(t_f) = R^-1 Lambda(0) R`` and
    ``F^T nu(t_f) = nu(0)``); nonzero covector; the reflection identity
    ``chi_next(t_k - t) = chi_prev(t)`` on the first link, where
    ``chi_u = H(active) - H(u)``. For the plus family ``nu2 >= -nu2_tol`` on
    the first link with no interior zero.
    """
    costate = costate or solve_costate_bvp(p)
    tag, tr_state = p.family.tag, p.trajectory
    z0 = tr_state.z(0.0)
    lc = costate.lambda_cost
    segments = [(link.control, link.duration) for link in tr_state.links]
    s0 = LiftedState(np.eye(2), z0, costate)
    tr = propagate(s0, segments, rtol=BVP_RTOL, atol=BVP_ATOL, method="DOP853", margin=0.0)
    reasons = []

    # Hamiltonian and per-link dominance
    margins, end_gaps, h_sup = [], [], 0.0
    for link in tr_state.links:
        ts = link.start + link.duration * np.linspace(0.0, 1.0, grid + 2)
        H = vertex_hamiltonians_array(_dense(tr, ts), lc)
        i = int(np.argmax(link.control))
        others = np.delete(H, i, axis=1).max(axis=1)
        gap = H[:, i] - others
        h_sup = max(h_sup, float(np.abs(H[:, i]).max()))
        margins.append(float(gap[1:-1].min()))
        end_gaps.append([float(gap[0]), float(gap[-1])])
    if h_sup > hamiltonian_tol:
        reasons.append(f"Hamiltonian does not vanish: sup |H| = {h_sup:.3e}")
    if min(margins) <= 0:
        reasons.append(f"active vertex does not dominate inside a link: {min(margins):.3e}")

    # transversality over the full period
    fin = tr.final
    L_res = float(np.abs(fin.Lambda - R_INV @ costate.Lambda @ R).max())
    F = mobius_jacobian(R_INV, z0)
    n_res = float(np.abs(F.T @ fin.nu - costate.nu).max())
    if max(L_res, n_res) > transversality_tol:
        reasons.append(f"transversality fails: Lambda {L_res:.3e}, nu {n_res:.3e}")

    norm = float(np.linalg.norm(costate.vector()))
    if norm == 0:
        reasons.append("covector vanishes")

    # reflection identity and nu2 on the first link
    first = tr_state.links[0]
    step = -1 if tag == PLUS else 1
    i_act = int(np.argmax(first.control))
    i_prev = int(np.argmax(control_of_rotation(first.k - step)))
    i_next = int(np.argmax(control_of_rotation(first.k + step)))
    ts = first.duration * np.linspace(0.0, 1.0, grid + 2)
    Yf = _dense(tr, ts)
    H = vertex_hamiltonians_array(Yf, lc)
    chi_prev = H[:, i_act] - H[:, i_prev]
    chi_next = H[:, i_act] - H[:, i_next]
    sym = float(np.abs(chi_next[::-1] - chi_prev).max())
    if sym > symmetry_tol:
        reasons.append(f"reflection identity fails: {sym:.3e}")
    nu2 = Yf[:, 10]
    nu2_min = float(nu2.min())
    zeros = int(np.count_nonzero(nu2[1:-1] <= 0))
    if tag == PLUS:
        if nu2_min < -nu2_tol:
            reasons.append(f"nu2 negative on the first link: {nu2_min:.3e}")
        if zeros:
            reasons.append(f"nu2 has {zeros} interior grid zeros")

    sign = multiplier_sign(costate)
    if sign != NORMAL:
        reasons.append({WRONG_SIGN: "multiplier lambda_cost has the wrong sign",
                        ABNORMAL: "multiplier is abnormal"}[sign])
    return ExtremalityReport(
        family=tag, k=p.family.k, lambda_cost=float(lc), lambda_cost_sign=sign,
        hamiltonian_sup_norm=h_sup, switching_margins=margins, endpoint_gaps=end_gaps,
        transversality_residuals={"Lambda": L_res, "nu": n_res},
        time_symmetry_residual=sym, nu2_min=nu2_min, nu2_interior_zeros=zeros,
        costate_norm=norm, verdict="fail" if reasons else "pass", reasons=reasons,
        tolerances={"hamiltonian": hamiltonian_tol, "transversality": transversality_tol,
                    "symmetry": symmetry_tol, "nu2": nu2_tol, "rank": RANK_TOL,
                    "ode_rtol": BVP_RTOL, "ode_atol": BVP_ATOL},
    )


def classify_state(s, tol=1e-12):
    """``'singular'`` if all switching functions vanish at ``s``, else ``'regular'``."""
    return "singular" if max(abs(c) for c in switching(s)) <= tol else "regular"


def singular_link_deviation(t_max=2.0, n=201):
    """Propagate the circle's lifted state under ``E3`` and compare ``nu2``.

    Returns ``(times, numeric nu2, closed form)``. The link leaves the star
    region near ``t = 0.40`` so the star check is disabled; the field stays
    regular on ``[0, 2]``.
    """
    ts = np.linspace(0.0, t_max, n)
    tr = propagate(singular_state(), [(E3, t_max)], rtol=1e-13, atol=1e-14,
                   method="DOP853", margin=None)
    nu2 = _dense(tr, ts)[:, 10]
    return ts, nu2, np.array([nu2_singular_link(t) for t in ts])


# --- positivity diagnostic ----------------------------------------------------

def triangle_coords(y_k, t):
    """``(y, v) = (1 + 3 y_k^2, y exp(sqrt3 y_k t))``."""
    y = 1 + 3 * y_k * y_k
    return y, y * math.exp(SQRT3 * y_k * t)


def f_triangle_row(y, vs):
    """``f(y, v)`` for one ``y`` and an array of ``v`` (single propagation)."""
    y_k = math.sqrt((y - 1) / 3)
    vs = np.atleast_1d(np.asarray(vs, dtype=float))
    ts = np.log(vs / y) / (SQRT3 * y_k)
    costate, _ = solve_link_costate(PLUS, y_k)
    t_hi = float(ts.max())
    if t_hi <= 0:
        nu2 = np.full(len(ts), costate.nu[1])
    else:
        s0 = LiftedState(np.eye(2), 1j * y_k, costate)
        tr = propagate(s0, [(E3, t_hi)], rtol=1e-13, atol=1e-14, method="DOP853", margin=None)
        nu2 = _dense(tr, np.clip(ts, 0.0, t_hi))[:, 10]
    return 3 * SQRT3 * y_k ** 5 * vs ** 2 * nu2


def f_triangle(y, v, y0=None):
    """``f(y, v) = 3 sqrt3 y0^5 v^2 nu2`` on ``T = {2 sqrt2 <= y <= v <= 4}``.

    ``nu2`` is taken along the first link of the (continuously interpolated)
    plus-family trajectory with ``y_k = y0 = sqrt((y - 1)/3)`` at time
    ``t = ln(v/y)/(sqrt3 y0)``; the costate is normalized to ``lambda_cost = -1``.
    """
    if y0 is not None and not math.isclose(y0, math.sqrt((y - 1) / 3), rel_tol=1e-12):
        raise ValueError("y0 must equal sqrt((y - 1)/3)")
    return float(f_triangle_row(y, [v])[0])


def f_diagonal_derivative(y):
    """Closed form of ``df/dy`` on the diagonal, ``y((y - 4) + y ln(4/y))``."""
    return y * ((y - 4) + y * math.log(4 / y))


# --- local deformation of the octagon -----------------------------------------

@dataclass
class DeformationQuadratic:
    """Expansion of the cost along the endpoint-constrained curve ``N``.

    ``cost(eta1) = cost(0) + b1 eta1 + c2 eta1^2 + ...`` and ``b2 = 2 c2`` is
    the second derivative along ``N``. ``a1[j]``, ``a2[j]`` are the first and
    second order coefficients of ``eta_{j+1}`` on ``N``.
    """

    b1: float
    b2: float
    c2: float
    a1: np.ndarray
    a2: np.ndarray
    samples: np.ndarray
    costs: np.ndarray
    etas: np.ndarray
    degree: int

    def to_dict(self):
        return {k: (v.tolist() if isinstance(v, np.ndarray) else v)
                for k, v in asdict(self).items()}


def deformed_trajectory(p, eta):
    """Four-link trajectory ``((0, t1+eta1), ..., (-3, t1+eta4))`` from ``i y1 + eta5 + i eta6``."""
    sched = [(-j, p.t_k + eta[j]) for j in range(4)]
    z0 = complex(eta[4], p.y_k + eta[5])
    return concat(sched, z0), z0


def endpoint_residuals(p, eta):
    """``g(t_f)`` entries 11, 12, 21 minus ``R``'s and ``z(t_f) - R^-1.z(0)``."""
    tr, z0 = deformed_trajectory(p, eta)
    g = tr.g_final
    d = tr.z_final - mobius(R_INV, z0)
    return np.array([g[0, 0] - R[0, 0], g[0, 1] - R[0, 1], g[1, 0] - R[1, 0], d.real, d.imag])


def _solve_constraints(p, eta1, guess, fd_step, tol=1e-14, max_iter=30):
    w = np.array(guess, dtype=float)
    for _ in range(max_iter):
        eta = np.r_[eta1, w]
        r = endpoint_residuals(p, eta)
        if np.abs(r).max() <= tol:
            return eta
        Jm = np.empty((5, 5))
        for j in range(5):
            ep, em = eta.copy(), eta.copy()
            ep[j + 1] += fd_step
            em[j + 1] -= fd_step
            Jm[:, j] = (endpoint_residuals(p, ep) - endpoint_residuals(p, em)) / (2 * fd_step)
        step = np.linalg.solve(Jm, r)
        w = w - step
        if not np.isfinite(w).all() or np.abs(w).max() > 0.1:
            break
    eta = np.r_[eta1, w]
    res = np.abs(endpoint_residuals(p, eta)).max()
    if res > 1e-12:
        raise NewtonDivergence(f"endpoint constraints not solved at eta1 = {eta1}: {res:.3e}")
    return eta


def local_deformation_quadratic(p=None, samples=(-4e-3, -2e-3, -1e-3, 1e-3, 2e-3, 4e-3),
                                fd_step=1e-6, degree=4):
    """Fit the cost along ``N`` near the smoothed octagon.

    For each ``eta1`` in ``samples`` the five endpoint equations are solved for
    ``eta2..eta6`` by Newton's method (central-difference Jacobian); the cost
    differences and the ``eta_j`` are then fitted by least squares with a
    polynomial of ``degree`` without constant term. A degree-4 fit keeps the
    cubic and quartic parts of the cost out of ``b1`` and ``c2``.

    Raises
    ------
    NewtonDivergence
    """
    p = p or build_polygon(PolygonFamily(PLUS, 1))
    hs = np.asarray(samples, dtype=float)
    etas = []
    for h in hs:
        guess = h * np.array([-1.0, 1.0, -1.0, 0.0, 0.0])
        etas.append(_solve_constraints(p, h, guess, fd_step))
    etas = np.array(etas)
    costs = np.array([deformed_trajectory(p, e)[0].total_cost for e in etas]) - p.area
    V = np.vander(hs, degree + 1, increasing=True)[:, 1:]
    b = np.linalg.lstsq(V, costs, rcond=None)[0]
    A = np.linalg.lstsq(V, etas, rcond=None)[0]
    return DeformationQuadratic(b1=float(b[0]), b2=float(2 * b[1]), c2=float(b[1]),
                                a1=A[0], a2=A[1], samples=hs, costs=costs, etas=etas,
                                degree=degree)


__all__ = [
    "NORMAL", "ABNORMAL", "WRONG_SIGN", "ad_matrix", "bvp_matrix", "solve_link_costate",
    "solve_costate_bvp", "multiplier_sign", "vertex_hamiltonians_array",
    "ExtremalityReport", "verify_extremal", "classify_state", "singular_link_deviation",
    "triangle_coords", "f_triangle", "f_triangle_row", "f_diagonal_derivative",
    "DeformationQuadratic", "deformed_trajectory", "endpoint_residuals",
    "local_deformation_quadratic",
]
