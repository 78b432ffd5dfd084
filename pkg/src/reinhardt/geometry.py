"""SL2(R) / sl2(R) matrix algebra and the half-plane correspondences.

Matrices are plain ``(2, 2)`` float arrays. Points of the upper half-plane
are Python ``complex`` numbers ``x + 1j*y`` with ``y > 0``; points of the
Poincare disk are complex numbers of modulus < 1.
"""

import math

import numpy as np

from .exceptions import NotPositivelyOriented

SQRT3 = math.sqrt(3.0)

I2 = np.eye(2)
J = np.array([[0.0, -1.0], [1.0, 0.0]])


def rot(theta):
    """Counterclockwise rotation ``exp(J theta)``."""
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


R = rot(math.pi / 3)
R_INV = rot(-math.pi / 3)


def rpow(k):
    """``R**k`` for an integer ``k``, computed without accumulating products."""
    return rot(k * math.pi / 3)


def det(m):
    return m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]


def inv(g):
    """Inverse of a matrix in SL2 (adjugate divided by the determinant)."""
    return np.array([[g[1, 1], -g[0, 1]], [-g[1, 0], g[0, 0]]]) / det(g)


def bracket(a, b):
    """Commutator ``[a, b] = ab - ba``."""
    return a @ b - b @ a


def pairing(a, b):
    """Invariant inner product ``<a, b> = trace(ab)``."""
    return float(np.trace(a @ b))


def renormalize(g, tol=1e-12):
    """Project ``g`` back onto det 1 when round-off has drifted it."""
    d = det(g)
    if abs(d - 1.0) > tol:
        return g / math.sqrt(d)
    return g


def zhat(z):
    """Upper-triangular ``[[y, x], [0, 1]]`` carrying ``i`` to ``z``."""
    return np.array([[z.imag, z.real], [0.0, 1.0]])


def x_of_z(z):
    """sl2 element ``zhat J zhat^-1`` on the adjoint orbit of ``J``.

    Raises
    ------
    ValueError
        If ``z`` is not in the upper half-plane.
    """
    x, y = z.real, z.imag
    if not y > 0:
        raise ValueError(f"point {z} is not in the upper half-plane")
    return np.array([[x / y, -x * x / y - y], [1.0 / y, -x / y]])


def z_of_x(X):
    """Inverse of :func:`x_of_z`: ``y = 1/c21``, ``x = c11/c21``."""
    c21 = X[1, 0]
    if not c21 > 0:
        raise NotPositivelyOriented(f"c21 = {c21} is not positive")
    return complex(X[0, 0] / c21, 1.0 / c21)


def mobius(g, z):
    """Linear fractional action ``(az + b) / (cz + d)``."""
    return complex((g[0, 0] * z + g[0, 1]) / (g[1, 0] * z + g[1, 1]))


def mobius_jacobian(g, z):
    """Real 2x2 derivative of ``z -> g.z`` at ``z``.

    The complex derivative is ``1 / (cz + d)**2`` for ``det g = 1``; it acts on
    ``(dx, dy)`` as multiplication by a complex number.
    """
    w = det(g) / (g[1, 0] * z + g[1, 1]) ** 2
    return np.array([[w.real, -w.imag], [w.imag, w.real]])


def disk_of_half(z):
    """Cayley map ``w = (z - i) / (z + i)`` to the Poincare disk.

    Real ``z`` (ideal points) map to the unit circle.
    """
    if z.imag < 0:
        raise ValueError(f"point {z} is not in the upper half-plane")
    return (z - 1j) / (z + 1j)


def half_of_disk(w):
    """Inverse Cayley map back to the upper half-plane."""
    if not abs(w) < 1:
        raise ValueError(f"point {w} is not in the open unit disk")
    return -1j * (1 + w) / (w - 1)


def hexagon_vertex(j):
    """``e_j = (cos(pi j/3), sin(pi j/3))``, midpoints of the hexagon edges."""
    return np.array([math.cos(math.pi * j / 3), math.sin(math.pi * j / 3)])
