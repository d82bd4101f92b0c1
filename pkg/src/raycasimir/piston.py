"""Closed forms for the piston limit ``h = 0``.

With the squares touching the sidewalls no loop can escape, every image
contributes, and the lattice sums collapse to an Epstein zeta function
(even loops) and a pair of elementary series (odd loops).
"""
from __future__ import annotations

import math

import numpy as np
from scipy import special

from .core import ZETA3, EnergyBreakdown, ForceBreakdown, Geometry


def _bessel_terms(x: float, order: float, tol: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Index pairs ``(k, m)`` with ``2 pi k m x`` large enough to reach ``tol``."""
    jmax = max(1, math.ceil((-math.log(tol) + 10 + order) / (2 * math.pi * x)))
    k, m = np.meshgrid(np.arange(1, jmax + 1), np.arange(1, jmax + 1), indexing="ij")
    sel = (k * m) <= jmax
    return k[sel].astype(float), m[sel].astype(float), 2 * math.pi * x * (k[sel] * m[sel])


def epstein_z2(a: float, b: float, p: float = 3.0, tol: float = 1e-15) -> float:
    """Quadrant Epstein sum ``sum_{n,m>=1} ((n a)^2 + (m b)^2)^(-p/2)`` for ``p > 2``.

    Evaluated by resumming one index with Poisson's formula, which leaves
    a rapidly convergent double series of Bessel functions
    ``K_{(p-1)/2}``.  The longer side is put in the exponent so the
    series always decays at least like ``exp(-2 pi k m)``.
    """
    if a <= 0 or b <= 0:
        raise ValueError("a and b must be positive")
    if p <= 2:
        raise ValueError("the quadrant sum diverges for p <= 2")
    if b < a:
        a, b = b, a
    s = p / 2
    nu = s - 0.5
    smooth = math.sqrt(math.pi) * special.gamma(nu) / special.gamma(s) * special.zeta(2 * s - 1) / (a * b ** (2 * s - 1))
    axis = special.zeta(2 * s) / b ** (2 * s)
    k, m, z = _bessel_terms(b / a, nu, tol)
    q = b * m / a
    bessel = 4 * math.pi**s / (special.gamma(s) * a ** (2 * s)) * math.fsum(q ** (-nu) * k**nu * special.kv(nu, z))
    return 0.5 * (smooth - axis + bessel)


def _g3(x: float, y: float) -> float:
    # antiderivative with d2/dxdy = (x^2 + y^2)^(-3/2)
    if math.isinf(x) and math.isinf(y):
        return 0.0
    if math.isinf(x):
        return -1.0 / y
    if math.isinf(y):
        return -1.0 / x
    return -math.hypot(x, y) / (x * y)


def _rect3(x1, x2, y1, y2) -> float:
    return _g3(x2, y2) - _g3(x1, y2) - _g3(x2, y1) + _g3(x1, y1)


def epstein_z2_direct(a: float, b: float, N: int = 2000) -> float:
    """Brute-force ``p = 3`` sum: an ``N x N`` block plus a midpoint-rule tail.

    Each omitted lattice point is replaced by the integral over its
    ``a x b`` cell; the tail error falls like ``N^-3``.  Used as an
    independent check of :func:`epstein_z2`.
    """
    n = np.arange(1, N + 1, dtype=float)
    rows = np.sum(((n[:, None] * a) ** 2 + (n[None, :] * b) ** 2) ** -1.5, axis=1)
    X, Y = (N + 0.5) * a, (N + 0.5) * b
    tail = _rect3(X, math.inf, 0.5 * b, math.inf) + _rect3(0.5 * a, X, Y, math.inf)
    return math.fsum(rows) + tail / (a * b)


def _s1(x: float, tol: float = 1e-16) -> tuple[float, float]:
    """``S(x) = sum (k/m) K_1(2 pi k m x)`` and ``dS/dx``."""
    k, m, z = _bessel_terms(x, 0.5, tol)
    val = math.fsum(k / m * special.k1(z))
    der = math.fsum(k / m * 2 * math.pi * k * m * special.kvp(1, z))
    return val, der


def _z2_p3_and_da(a: float, b: float) -> tuple[float, float]:
    """``Z2(a, b; 3)`` and its derivative in ``a``."""
    if b >= a:
        x = b / a
        S, dS = _s1(x)
        z = 0.5 * (math.pi**2 / (3 * a * b * b) - ZETA3 / b**3 + 8 * math.pi / (a * a * b) * S)
        dz = 0.5 * (
            -(math.pi**2) / (3 * a * a * b * b)
            - 16 * math.pi / (a**3 * b) * S
            + 8 * math.pi / (a * a * b) * dS * (-b / (a * a))
        )
        return z, dz
    # roles swapped: Z2(a, b) = Z2(b, a) with the long side b -> a
    x = a / b
    S, dS = _s1(x)
    z = 0.5 * (math.pi**2 / (3 * b * a * a) - ZETA3 / a**3 + 8 * math.pi / (b * b * a) * S)
    dz = 0.5 * (
        -2 * math.pi**2 / (3 * b * a**3)
        + 3 * ZETA3 / a**4
        - 8 * math.pi / (b * b * a * a) * S
        + 8 * math.pi / (b * b * a) * dS / b
    )
    return z, dz


def piston_even_energy(a: float, s: float) -> float:
    """Even-loop energy at ``h = 0`` without the parallel-plate series:
    ``-(1/8 pi) a s Z2(a, s; 3)``."""
    return -a * s * epstein_z2(a, s, 3.0) / (8 * math.pi)


def piston_odd_energy(a: float, s: float) -> float:
    """Odd-loop energy at ``h = 0``: ``-(pi/48) (1/s + 1/a)``."""
    return -(math.pi / 48) * (1 / s + 1 / a)


def piston_even_force(a: float, s: float) -> float:
    """``-dE/da`` of :func:`piston_even_energy`."""
    z, dz = _z2_p3_and_da(a, s)
    return s * (z + a * dz) / (8 * math.pi)


def piston_odd_force(a: float, s: float) -> float:
    return -math.pi / (48 * a * a)


def piston_energy(geometry: Geometry) -> EnergyBreakdown:
    """All channels at ``h = 0``; ``geometry.h`` is ignored."""
    from .even import pfa_energy

    a, s = geometry.a, geometry.s
    return EnergyBreakdown(piston_even_energy(a, s), pfa_energy(geometry), piston_odd_energy(a, s))


def piston_force(geometry: Geometry) -> ForceBreakdown:
    """All force channels at ``h = 0``; ``geometry.h`` is ignored."""
    from .core import pfa_force

    g0 = geometry.with_h(0.0)
    a, s = g0.a, g0.s
    return ForceBreakdown(g0, piston_even_force(a, s), pfa_force(g0), piston_odd_force(a, s))
