"""Hamiltonian, adjoint flow, switching functions and lifted-state propagation.

The Hamiltonian uses the trace form ``<A, B> = trace(AB)``::

    H = <Lambda, X> - (3/2) lambda_cost <J, X> + nu1 f1 + nu2 f2

with ``X = X(x, y)`` on the adjoint orbit of ``J``. The adjoint equations are
``Lambda' = [Lambda, X]`` and ``nu' = -dH/d(x, y)`` at fixed control. The
partials of ``X`` are::

    dX/dx = [[1/y, -2x/y], [0, -1/y]]
    dX/dy = [[-x/y^2, x^2/y^2 - 1], [-1/y^2, x/y^2]]
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import solve_ivp

from .control import (DEFAULT_MARGIN, VERTICES, coefficients, cost_rate, star_margin,
                      velocity, velocity_jacobian)
from .exceptions import DegenerateDenominator, StarExit, StepSizeUnderflow
from .geometry import J, SQRT3, pairing, x_of_z

RTOL = 1e-10
ATOL = 1e-10


@dataclass(frozen=True)
class Costate:
    """Covector ``(Lambda, nu)`` with its cost multiplier."""

    Lambda: np.ndarray
    nu: np.ndarray
    lambda_cost: float

    def scaled(self, c):
        return Costate(c * self.Lambda, c * self.nu, c * self.lambda_cost)

    def vector(self):
        """Coordinates ``(L11, L12, L21, nu1, nu2, lambda_cost)``."""
        L = self.Lambda
        return np.array([L[0, 0], L[0, 1], L[1, 0], self.nu[0], self.nu[1], self.lambda_cost])

    @classmethod
    def from_vector(cls, v):
        p, q, r, n1, n2, lc = (float(a) for a in v)
        return cls(np.array([[p, q], [r, -p]]), np.array([n1, n2]), lc)

    def is_zero(self, tol=0.0):
        return bool(np.abs(self.vector()).max() <= tol)


@dataclass(frozen=True)
class LiftedState:
    """A point ``(g, z, Lambda, nu)`` of the cotangent bundle at time ``t``."""

    g: np.ndarray
    z: complex
    costate: Costate
    t: float = 0.0
    cost: float = 0.0

    @property
    def Lambda(self):
        return self.costate.Lambda

    @property
    def nu(self):
        return self.costate.nu

    @property
    def lambda_cost(self):
        return self.costate.lambda_cost

    @property
    def X(self):
        return x_of_z(self.z)

    def with_costate(self, costate):
        return replace(self, costate=costate)


def singular_state(lambda_cost=-1.0):
    """Lifted state of the circle: ``Lambda = (3/2) lambda_cost J``, ``nu = 0``, ``z = i``."""
    return LiftedState(np.eye(2), 1j, Costate(1.5 * lambda_cost * J, np.zeros(2), lambda_cost))


@dataclass(frozen=True)
class CanonicalPoint:
    xi1: float
    xi2: float
    mu1: float
    mu2: float


def hamiltonian_parts(s, u):
    """Split ``H = H_Lie + H_h`` into its Lie-algebra and half-plane terms."""
    X = s.X
    h_lie = pairing(s.Lambda, X) - 1.5 * s.lambda_cost * pairing(J, X)
    h_half = float(s.nu @ velocity(s.z, u))
    return h_lie, h_half


def hamiltonian(s, u):
    h_lie, h_half = hamiltonian_parts(s, u)
    return h_lie + h_half


def vertex_hamiltonians(s):
    """``H`` at the three vertices ``E1, E2, E3``."""
    return np.array([hamiltonian(s, e) for e in VERTICES])


def hamiltonian_gradient(s, u):
    """``(dH/dx, dH/dy)`` at fixed costate and control."""
    x, y = s.z.real, s.z.imag
    L, lc = s.Lambda, s.lambda_cost
    p, q, r = L[0, 0], L[0, 1], L[1, 0]
    dx = 2 * p / y - 2 * x * r / y + 1.5 * lc * 2 * x / y
    dy = (-2 * p * x - q) / (y * y) + r * (x * x / (y * y) - 1) \
        - 1.5 * lc * (x * x / (y * y) - 1 + 1 / (y * y))
    return np.array([dx, dy]) + velocity_jacobian(s.z, u).T @ s.nu


def adjoint_rhs(s, u):
    """Return ``(dLambda, dnu)`` with ``dLambda = [Lambda, X]``."""
    X = s.X
    dL = s.Lambda @ X - X @ s.Lambda
    return dL, -hamiltonian_gradient(s, u)


def switching(s):
    """Switching functions ``(chi12, chi13, chi23)``, ``chi_ij = H(e_i) - H(e_j)``."""
    h1, h2, h3 = vertex_hamiltonians(s)
    return h1 - h2, h1 - h3, h2 - h3


def chi32_closed_form(s):
    """``chi32 = 2 sqrt3 nu2 y^2 / (1 - 3 x^2)``."""
    x, y = s.z.real, s.z.imag
    return 2 * SQRT3 * s.nu[1] * y * y / (1 - 3 * x * x)


def xi_of_z(z):
    """Canonical base coordinates ``(xi1, xi2)``; the star region maps to a half-strip."""
    x, y = z.real, z.imag
    return x, (3 * (x * x + y * y) + SQRT3 * x) / (1 + SQRT3 * x)


def canonical(s):
    """Fiber coordinates with ``nu1 dx + nu2 dy = mu1 dxi1 + mu2 dxi2``."""
    x, y = s.z.real, s.z.imag
    xi1, xi2 = xi_of_z(s.z)
    w = 1 + SQRT3 * x
    dxi2_dx = (6 * x + SQRT3) / w - SQRT3 * (3 * (x * x + y * y) + SQRT3 * x) / (w * w)
    dxi2_dy = 6 * y / w
    mu2 = s.nu[1] / dxi2_dy
    mu1 = s.nu[0] - mu2 * dxi2_dx
    return CanonicalPoint(xi1, xi2, mu1, mu2)


def chi13_factor(z):
    x, y = z.real, z.imag
    return 6 * y ** 3 / (1 - 3 * x * x - 3 * y * y)


def chi23_factor(z):
    x, y = z.real, z.imag
    return 12 * SQRT3 * y ** 3 / ((1 - SQRT3 * x) * (1 + SQRT3 * x) ** 2)


def nu2_singular_link(t):
    """``nu2`` along the ``E3`` link leaving the circle's lifted state."""
    return (-1 + math.exp(-2 * SQRT3 * t) + 2 * SQRT3 * t * math.exp(-SQRT3 * t)) / SQRT3


# --- flat vector layout used by the integrator -------------------------------
# [g11 g12 g21 g22 | x y | L11 L12 L21 | nu1 nu2 | cost]
NSTATE = 12


def pack(s):
    L = s.Lambda
    return np.array([*s.g.ravel(), s.z.real, s.z.imag, L[0, 0], L[0, 1], L[1, 0],
                     s.nu[0], s.nu[1], s.cost])


def unpack(Y, lambda_cost, t=0.0):
    g = np.array([[Y[0], Y[1]], [Y[2], Y[3]]])
    L = np.array([[Y[6], Y[7]], [Y[8], -Y[6]]])
    return LiftedState(g, complex(Y[4], Y[5]), Costate(L, np.array([Y[9], Y[10]]), lambda_cost),
                       t=float(t), cost=float(Y[11]))


def lifted_rhs(Y, abc, lc):
    """Right-hand side of the full state + costate + cost system (scalar code)."""
    a, b, c = abc
    g11, g12, g21, g22, x, y, p, q, r, n1, n2, _ = Y
    yi = 1.0 / y
    X11, X12, X21 = x * yi, -x * x * yi - y, yi
    d = b + 2 * a * x - c * x * x - c * y * y
    if abs(d) < 1e-10:
        raise DegenerateDenominator(f"trace(Z0 X) vanishes at z = {complex(x, y)}")
    n = d + 2 * c * y * y
    pc = a - c * x
    di, d2 = 1.0 / d, 1.0 / (d * d)
    f1 = y * n * di
    f2 = 2 * pc * y * y * di
    f1x = -4 * c * y ** 3 * pc * d2
    f1y = (n * d + 2 * c * y * y * (d + n)) * d2
    f2x = 2 * y * y * (-c * d - 2 * pc * pc) * d2
    f2y = 4 * y * pc * (d + c * y * y) * d2
    yi2 = yi * yi
    hx = 2 * p * yi - 2 * x * r * yi + 3 * lc * x * yi + n1 * f1x + n2 * f2x
    hy = (-2 * p * x - q) * yi2 + r * (x * x * yi2 - 1) \
        - 1.5 * lc * (x * x * yi2 - 1 + yi2) + n1 * f1y + n2 * f2y
    return np.array([
        g11 * X11 + g12 * X21, g11 * X12 - g12 * X11,
        g21 * X11 + g22 * X21, g21 * X12 - g22 * X11,
        f1, f2,
        q * X21 - X12 * r, 2 * (p * X12 - q * X11), 2 * (r * X11 - p * X21),
        -hx, -hy,
        1.5 * (x * x + y * y + 1) * yi,
    ])


@dataclass
class Trace:
    """Dense-output record of a propagation over consecutive segments."""

    lambda_cost: float
    t: np.ndarray
    Y: np.ndarray
    controls: list = field(default_factory=list)
    segments: list = field(default_factory=list)  # (t0, t1, control, OdeSolution)

    def state(self, t):
        for t0, t1, _, sol in self.segments:
            if t0 <= t <= t1:
                return unpack(sol(t), self.lambda_cost, t)
        raise ValueError(f"time {t} outside the propagated span")

    def control_at(self, t):
        for t0, t1, u, _ in self.segments:
            if t0 <= t <= t1:
                return u
        raise ValueError(f"time {t} outside the propagated span")

    @property
    def final(self):
        return unpack(self.Y[-1], self.lambda_cost, self.t[-1])

    def states(self):
        return [unpack(Y, self.lambda_cost, t) for t, Y in zip(self.t, self.Y)]

    def hamiltonian_drift(self):
        """Sup over recorded samples of ``|H(lambda(t), u(t))|``."""
        return max(abs(hamiltonian(s, u)) for s, u in zip(self.states(), self.controls))


def _star_event(margin):
    def event(t, Y, *args):
        return star_margin(complex(Y[4], Y[5])) - margin
    event.terminal = True
    event.direction = -1
    return event


def propagate(s, segments, rtol=RTOL, atol=ATOL, margin=DEFAULT_MARGIN, method="RK45",
              samples_per_segment=None, events=None):
    """Integrate the lifted system over consecutive constant-control segments.

    Parameters
    ----------
    s : LiftedState
        Initial data.
    segments : sequence of (control, duration)
        Piecewise-constant control law.
    rtol, atol : float
        Local error tolerances of the adaptive embedded Runge-Kutta pair.
    margin : float or None
        Star-region margin; leaving it raises :class:`StarExit`. ``None``
        disables the check (the vector field stays regular past the star
        boundary until ``trace(Z0 X)`` vanishes).
    samples_per_segment : int, optional
        If given, record uniformly spaced samples instead of the solver steps.

    Returns
    -------
    Trace
    """
    Y0 = pack(s)
    t0 = s.t
    lc = s.lambda_cost
    ts, Ys, us, segs = [t0], [Y0], [np.asarray(segments[0][0]) if segments else None], []
    for u, dur in segments:
        u = np.asarray(u, dtype=float)
        abc = coefficients(u)
        t1 = t0 + float(dur)
        if dur == 0:
            continue
        t_eval = None
        if samples_per_segment:
            t_eval = np.linspace(t0, t1, samples_per_segment + 1)
        evs = ([] if margin is None else [_star_event(margin)]) + list(events or [])
        sol = solve_ivp(lambda t, Y: lifted_rhs(Y, abc, lc), (t0, t1), Y0, method=method,
                        rtol=rtol, atol=atol, dense_output=True, t_eval=t_eval, events=evs)
        if sol.status == -1:
            raise StepSizeUnderflow(sol.message)
        if sol.status == 1 and margin is not None and len(sol.t_events[0]):
            raise StarExit("trajectory left the star region", time=float(sol.t[-1]))
        t_end = float(sol.t[-1]) if sol.status == 1 else t1
        segs.append((t0, t_end, u, sol.sol))
        ts.extend(sol.t[1:])
        Ys.extend(sol.y.T[1:])
        us.extend([u] * (len(sol.t) - 1))
        if sol.status == 1:
            break  # a terminal user event fired
        t0, Y0 = t1, sol.y[:, -1]
    return Trace(lc, np.array(ts), np.array(Ys), us, segs)


def flow_matrix(z_path, u, duration, rtol=1e-12, atol=1e-13):
    """Linear map ``(Lambda(0), nu(0), lambda_cost) -> (Lambda(T), nu(T))``.

    ``z_path`` is the base point at ``t = 0``; the state part is integrated
    alongside the six basis covectors (the adjoint system is linear in the
    covector). Returns a ``(5, 6)`` matrix in :meth:`Costate.vector` order.
    """
    cols = []
    for j in range(6):
        e = np.zeros(6)
        e[j] = 1.0
        s = LiftedState(np.eye(2), z_path, Costate.from_vector(e))
        tr = propagate(s, [(u, duration)], rtol=rtol, atol=atol, margin=0.0, method="DOP853")
        v = tr.final.costate.vector()
        cols.append(v[:5])
    return np.array(cols).T


__all__ = [
    "Costate", "LiftedState", "CanonicalPoint", "Trace", "singular_state",
    "hamiltonian", "hamiltonian_parts", "vertex_hamiltonians", "hamiltonian_gradient",
    "adjoint_rhs", "switching", "chi32_closed_form", "canonical", "xi_of_z",
    "chi13_factor", "chi23_factor", "nu2_singular_link", "propagate", "flow_matrix",
    "lifted_rhs", "pack", "unpack", "RTOL", "ATOL", "cost_rate",
]
