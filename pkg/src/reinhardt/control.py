"""Control simplex, control matrix and the state vector field on the half-plane.

A control is a length-3 array ``(u0, u1, u2)`` of barycentric weights. The
vertices are labelled ``E1 = (1, 0, 0)``,
``E2 = (0, 1, 0)``, ``E3 = (0, 0, 1)``.
"""

import numpy as np

from .exceptions import DegenerateDenominator
from .geometry import SQRT3, hexagon_vertex, x_of_z

E1 = np.array([1.0, 0.0, 0.0])
E2 = np.array([0.0, 1.0, 0.0])
E3 = np.array([0.0, 0.0, 1.0])
VERTICES = (E1, E2, E3)
CENTER = np.full(3, 1.0 / 3.0)

DEN_TOL = 1e-10
DEFAULT_MARGIN = 1e-8


def as_control(u, tol=1e-12):
    """Validate and return ``u`` as a float array on the simplex."""
    u = np.asarray(u, dtype=float)
    if u.shape != (3,):
        raise ValueError("a control has three barycentric weights")
    if abs(u.sum() - 1.0) > tol or (u < -tol).any():
        raise ValueError(f"{u} is not in the control simplex")
    return u


def coefficients(u):
    """Entries ``(a, b, c)`` of the control matrix ``[[a, b], [c, -a]]``."""
    u0, u1, u2 = u
    return (u1 - u2) / SQRT3, u0 / 3 - 2 * u1 / 3 - 2 * u2 / 3, u0


def control_matrix(u):
    """The traceless matrix ``Z0(u)`` with ``e_{2i} ^ Z0 e_{2i} = u_i``."""
    a, b, c = coefficients(u)
    return np.array([[a, b], [c, -a]])


def wedge(v, w):
    return v[0] * w[1] - v[1] * w[0]


def control_residuals(u):
    """Residuals of the defining linear system for ``Z0(u)``."""
    Z = control_matrix(u)
    return np.array([wedge(hexagon_vertex(2 * i), Z @ hexagon_vertex(2 * i)) - u[i]
                     for i in range(3)])


def denominator(z, u):
    """``b + 2ax - cx^2 - cy^2``, which equals ``y trace(Z0 X)``."""
    a, b, c = coefficients(u)
    x, y = z.real, z.imag
    return b + 2 * a * x - c * x * x - c * y * y


def _checked_denominator(z, u):
    d = denominator(z, u)
    if abs(d) < DEN_TOL:
        raise DegenerateDenominator(f"trace(Z0 X) vanishes at z = {z}")
    return d


def delta(u, X):
    """Normalization ``-2 / trace(Z0(u) X)`` keeping ``X'`` traceless."""
    tr = float(np.trace(control_matrix(u) @ X))
    if abs(tr) < DEN_TOL:
        raise DegenerateDenominator("trace(Z0 X) vanishes")
    return -2.0 / tr


def star_contains(z, margin=0.0):
    """Membership in the ideal triangle ``|x| < 1/sqrt3``, ``|z|^2 > 1/3``.

    ``margin`` shrinks the region: both inequalities must hold with slack at
    least ``margin``.
    """
    x, y = z.real, z.imag
    if not y > 0:
        return False
    return (1 / SQRT3 - abs(x) > margin) and (x * x + y * y - 1 / 3 > margin)


def star_margin(z):
    """Smallest slack of the two star inequalities (negative outside)."""
    x, y = z.real, z.imag
    return min(1 / SQRT3 - abs(x), x * x + y * y - 1 / 3)


def velocity(z, u):
    """Half-plane velocity ``(f1, f2) = (dx/dt, dy/dt)`` under control ``u``."""
    a, b, c = coefficients(u)
    x, y = z.real, z.imag
    d = _checked_denominator(z, u)
    f1 = y * (b + 2 * a * x - c * x * x + c * y * y) / d
    f2 = 2 * (a - c * x) * y * y / d
    return np.array([f1, f2])


def velocity_jacobian(z, u):
    """Matrix ``[[df1/dx, df1/dy], [df2/dx, df2/dy]]`` of partials of :func:`velocity`.

    With ``N = b + 2ax - cx^2 + cy^2`` and ``D = b + 2ax - cx^2 - cy^2``::

        df1/dx = -4 c y^3 (a - cx) / D^2
        df1/dy = (N D + 2 c y^2 (D + N)) / D^2
        df2/dx = 2 y^2 (-c D - 2 (a - cx)^2) / D^2
        df2/dy = 4 y (a - cx) (D + c y^2) / D^2
    """
    a, b, c = coefficients(u)
    x, y = z.real, z.imag
    d = _checked_denominator(z, u)
    n = b + 2 * a * x - c * x * x + c * y * y
    p = a - c * x
    d2 = d * d
    return np.array([
        [-4 * c * y ** 3 * p / d2, (n * d + 2 * c * y * y * (d + n)) / d2],
        [2 * y * y * (-c * d - 2 * p * p) / d2, 4 * y * p * (d + c * y * y) / d2],
    ])


def cost_rate(z):
    """Area integrand ``(3/2) (x^2 + y^2 + 1) / y``; at least 3, equal at ``i``."""
    x, y = z.real, z.imag
    return 1.5 * (x * x + y * y + 1) / y


def curvature(z, u, branch, g=None):
    """Planar curvature of the branch ``t -> g(t) e_{2i}``.

    ``kappa = (dt/ds)^3 delta u_i`` where the speed ``ds/dt = |g X e_{2i}|``.
    The speed is evaluated at ``g`` (identity by default).
    """
    X = x_of_z(z)
    g = np.eye(2) if g is None else g
    speed = float(np.linalg.norm(g @ X @ hexagon_vertex(2 * branch)))
    return delta(u, X) * u[branch] / speed ** 3


def rotate_control(u, k=1):
    """Control ``R^k . u``: ``R`` permutes the vertices ``E3 -> E2 -> E1 -> E3``.

    Satisfies ``Z0(R^k . u) = R^k Z0(u) R^-k``.
    """
    u = np.asarray(u, dtype=float)
    return np.roll(u, -(k % 3))


def segment(u, v, s):
    """Point ``s u + (1 - s) v`` of a segment in the simplex."""
    return s * np.asarray(u) + (1 - s) * np.asarray(v)


__all__ = [
    "E1", "E2", "E3", "VERTICES", "CENTER", "as_control", "coefficients",
    "control_matrix", "control_residuals", "denominator", "delta", "star_contains",
    "star_margin", "velocity", "velocity_jacobian", "cost_rate", "curvature",
    "segment", "rotate_control", "DEFAULT_MARGIN",
]
