"""Closed-form links and their concatenation into bang-bang trajectories.

Under the vertex controls ``E3`` and ``E2`` the half-plane ODE reduces to
``x' = y, y' = y^2 / (m + x)`` with ``m = +1/sqrt3`` (``E3``) or ``-1/sqrt3``
(``E2``). With ``c0 = x(0) + m``, ``alpha = y(0) / c0`` and ``s = exp(alpha t)``::

    x(t) = -m + c0 s,    y(t) = c0 alpha s

and the group path with ``g(0) = I`` is

    g = I + (s - 1) / (alpha^2 c0 s) * [[c0 - m, w], [1, m - c0 s]]
    w = c0 m (s + 1) - m^2 - c0^2 s (1 + alpha^2)

where ``w`` is fixed by ``det g = 1``. Links under ``E1`` (and every rotated
link) are obtained by conjugating the ``E3`` link by powers of ``R``.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .control import E1, E2, E3, star_contains, DEFAULT_MARGIN
from .exceptions import StarExit
from .geometry import SQRT3, I2, mobius, rpow, x_of_z

M3 = 1.0 / SQRT3
M2 = -1.0 / SQRT3


def link_params(z0, m=M3):
    """Return ``(c0, alpha)`` for a link started at ``z0``."""
    c0 = z0.real + m
    if c0 == 0:
        raise ValueError("link start lies on the vertical through the fixed point")
    return c0, z0.imag / c0


def link_state(z0, m, t):
    """Half-plane position after time ``t`` on the link from ``z0``."""
    c0, alpha = link_params(z0, m)
    s = math.exp(alpha * t)
    return complex(-m + c0 * s, c0 * alpha * s)


def link_group(z0, m, t):
    """Group element ``g(t)`` solving ``g' = g X`` with ``g(0) = I``."""
    c0, alpha = link_params(z0, m)
    s = math.exp(alpha * t)
    w = c0 * m * (s + 1) - m * m - c0 * c0 * s * (1 + alpha * alpha)
    f = (s - 1) / (alpha * alpha * c0 * s)
    return I2 + f * np.array([[c0 - m, w], [1.0, m - c0 * s]])


def link_cost(z0, m, t):
    """Integral of the area integrand along the link over ``[0, t]``.

    ``(x^2 + y^2 + 1) / y`` splits into terms in ``1/s``, ``1`` and ``s``; each
    integrates in closed form since ``ds = alpha s dt``.
    """
    c0, alpha = link_params(z0, m)
    a2 = alpha * alpha
    return 1.5 * ((m * m + 1) * (-math.expm1(-alpha * t)) / (c0 * a2)
                  - 2 * m * t / alpha
                  + c0 * (1 + a2) * math.expm1(alpha * t) / a2)


def link_exit_time(z0, margin=0.0):
    """First time the ``E3`` link from ``z0`` reaches ``x = 1/sqrt3 - margin``.

    Along an ``E3`` link ``x`` increases and ``|z|^2 - 1/3`` grows (the ray leaves
    the fixed point, which lies on that circle), so this is the only way out of
    the star region. Returns ``inf`` if the bound is never reached.
    """
    c0, alpha = link_params(z0, M3)
    ratio = (2 / SQRT3 - margin) / c0
    if ratio <= 1:
        return 0.0 if ratio > 0 else math.inf
    return math.log(ratio) / alpha


def gamma0(z, t):
    """The ``E3`` link with ``gamma0(z, 0) = I`` and initial tangent at ``z``."""
    return link_group(z, M3, t)


def rotated_link(i, z, T1, T2, t):
    """``R^i gamma0(z, .) R^-i`` active on ``[T1, T2]``, constant outside."""
    if T2 < T1:
        raise ValueError("T1 must not exceed T2")
    tau = min(max(t - T1, 0.0), T2 - T1)
    if tau == 0.0:
        return I2.copy()
    return rpow(i) @ gamma0(z, tau) @ rpow(-i)


def control_of_rotation(k):
    """Vertex ``R^k . E3`` of the control simplex; period 3 in ``k``."""
    return (E3, E2, E1)[k % 3]


@dataclass(frozen=True)
class Link:
    """One active factor of a concatenation."""

    k: int
    start: float
    duration: float
    z_base: complex
    g_before: np.ndarray = field(repr=False)

    @property
    def end(self):
        return self.start + self.duration

    @property
    def control(self):
        return control_of_rotation(self.k)

    def local(self, tau):
        """``(g, z, X)`` at local time ``tau`` in ``[0, duration]``."""
        Rk, Rmk = rpow(self.k), rpow(-self.k)
        zb = link_state(self.z_base, M3, tau)
        g = self.g_before @ Rk @ gamma0(self.z_base, tau) @ Rmk
        X = Rk @ x_of_z(zb) @ Rmk
        return g, mobius(Rk, zb), X


@dataclass(frozen=True)
class BangBangTrajectory:
    """A bang-bang trajectory built from a schedule of ``(k, duration)`` pairs."""

    schedule: tuple
    z0: complex
    links: tuple
    switch_times: tuple
    link_costs: tuple

    @property
    def t_final(self):
        return self.switch_times[-1]

    @property
    def total_cost(self):
        return math.fsum(self.link_costs)

    @property
    def g_final(self):
        return self.g(self.t_final)

    @property
    def z_final(self):
        return self.z(self.t_final)

    def _locate(self, t):
        if not self.links:
            raise ValueError("empty schedule")
        idx = int(np.searchsorted(self.switch_times, t, side="right")) - 1
        idx = min(max(idx, 0), len(self.links) - 1)
        link = self.links[idx]
        return link, min(max(t - link.start, 0.0), link.duration)

    def state(self, t):
        """``(g, z, X)`` at time ``t`` (clamped to ``[0, t_final]``)."""
        link, tau = self._locate(t)
        return link.local(tau)

    def g(self, t):
        return self.state(t)[0]

    def z(self, t):
        return self.state(t)[1]

    def X(self, t):
        return self.state(t)[2]

    def control(self, t):
        return self._locate(t)[0].control

    def cost(self, t):
        """Accumulated area integrand on ``[0, t]``."""
        link, tau = self._locate(t)
        i = self.links.index(link)
        return math.fsum(self.link_costs[:i]) + link_cost(link.z_base, M3, tau)

    def sample(self, per_link=64):
        """Times uniform within each link, shared endpoints listed once."""
        ts = [0.0]
        for link in self.links:
            ts.extend(link.start + link.duration * np.linspace(0, 1, per_link + 1)[1:])
        return np.array(ts)


def concat(schedule, z0, margin=DEFAULT_MARGIN, check_star=True):
    """Concatenate rotated ``E3`` links.

    The ``i``-th pair ``(k_i, t_i)`` runs ``R^{k_i} gamma0 R^{-k_i}`` for time
    ``t_i``; the base point of each link is updated by
    ``z_i = R^{k_i - k_{i+1}} . z(z_{i-1}, t_i)`` which keeps ``X`` continuous.

    Raises
    ------
    StarExit
        If some link leaves the star region (shrunk by ``margin``).
    """
    schedule = tuple((int(k), float(t)) for k, t in schedule)
    if any(t < 0 for _, t in schedule):
        raise ValueError("link durations must be non-negative")
    links, costs, times = [], [], [0.0]
    zb, g, T = complex(z0), I2.copy(), 0.0
    for i, (k, t) in enumerate(schedule):
        if check_star:
            if not star_contains(zb, margin):
                raise StarExit(f"link {i} starts outside the star region", link=i, time=T)
            t_exit = link_exit_time(zb, margin)
            if t_exit < t:
                raise StarExit(f"link {i} leaves the star region", link=i, time=T + t_exit)
        links.append(Link(k, T, t, zb, g))
        costs.append(link_cost(zb, M3, t))
        g = g @ rpow(k) @ gamma0(zb, t) @ rpow(-k)
        T += t
        times.append(T)
        z_end = link_state(zb, M3, t)
        k_next = schedule[i + 1][0] if i + 1 < len(schedule) else k
        zb = mobius(rpow(k - k_next), z_end)
    return BangBangTrajectory(schedule, complex(z0), tuple(links), tuple(times), tuple(costs))


__all__ = [
    "M2", "M3", "link_params", "link_state", "link_group", "link_cost",
    "link_exit_time", "gamma0", "rotated_link", "control_of_rotation", "Link",
    "BangBangTrajectory", "concat",
]
