"""Even loops: closed-form terms, the parallel-plate series and their sums.

An even loop returns to its start after ``2n`` bounces off the squares
and ``2m`` off the sidewalls.  Its length does not depend on the start
point, and the start points that keep it from escaping through the
square-sidewall gaps fill ``n~`` bands of height ``(s + 2h)/n~ - 2h``,
where ``n~ = n / gcd(n, m)``.  Summing the four sign images of each
``(n, m)`` in the quadrant gives the term

    -(1/4pi) * max((s+2h)/n~ - 2h, 0) * 4 n~ a / ((2na)^2 + (2m(s+2h))^2)^(3/2).

The ``(n, 0)`` loops are the parallel-plate (PFA) series and are kept
separately; ``(0, m)`` loops do not depend on ``a`` and are dropped.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import ZETA3, EvaluationError, Geometry, compensated_cumsum
from .series import ConvergenceReport, Termination, limit_estimate

DEFAULT_MAX_TERMS = 1_000_000


def occupancy(geometry: Geometry, n_reduced):
    """Height of each start-point band for reduced horizontal index ``n~``.

    Zero when the bands close up (equality included).
    """
    band = geometry.period / np.asarray(n_reduced, dtype=float) - 2.0 * geometry.h
    return np.where(band > 0, band, 0.0)


def even_term_value(geometry: Geometry, n: int, m: int) -> float:
    """Quadrant term for ``n, m >= 1`` (already includes the four sign images)."""
    if n < 1 or m < 1:
        raise ValueError("even terms are defined for n, m >= 1")
    nt = n // math.gcd(n, m)
    a, L = geometry.a, geometry.period
    occ = float(occupancy(geometry, nt))
    length = math.hypot(2 * n * a, 2 * m * L)
    return -occ * 4 * nt * a / (4 * math.pi * length**3)


def _triangle(K: int):
    n, m = np.meshgrid(np.arange(1, K), np.arange(1, K), indexing="ij")
    sel = (n + m) <= K
    return n[sel], m[sel]


def even_shell_sums(geometry: Geometry, K: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Energy and force of the even loops, summed per shell ``n + m = k``.

    Returns ``(k, energy_k, force_k)`` for ``k = 2..K``.
    """
    if K < 2:
        raise ValueError("K must be >= 2")
    n, m = _triangle(K)
    a, L = geometry.a, geometry.period
    nt = n // np.gcd(n, m)
    occ = occupancy(geometry, nt)
    na2 = (2.0 * n * a) ** 2
    D = na2 + (2.0 * m * L) ** 2
    pref = -occ * 4.0 * nt / (4.0 * math.pi)
    energy = pref * a / D**1.5
    # d/da [a D^-3/2] = (D - 3 (2na)^2) / D^5/2
    force = -pref * (D - 3.0 * na2) / D**2.5
    shell = n + m
    e_k = np.bincount(shell, weights=energy, minlength=K + 1)[2:]
    f_k = np.bincount(shell, weights=force, minlength=K + 1)[2:]
    return np.arange(2, K + 1), e_k, f_k


def pfa_energy(geometry: Geometry) -> float:
    """Parallel-plate energy ``-s zeta(3) / (16 pi a^2)`` of the facing walls."""
    return -geometry.s * ZETA3 / (16.0 * math.pi * geometry.a**2)


def pfa_force_value(geometry: Geometry) -> float:
    return -geometry.s * ZETA3 / (8.0 * math.pi * geometry.a**3)


def pfa_partial_sums(geometry: Geometry, K: int) -> tuple[np.ndarray, np.ndarray]:
    """``-(s a / 16 pi) sum_{n<=k} (n a)^-3`` for ``k = 1..K``, with its force."""
    n = np.arange(1, K + 1, dtype=float)
    a, s = geometry.a, geometry.s
    e = compensated_cumsum(-s / (16.0 * math.pi * a**2 * n**3))
    f = compensated_cumsum(-s / (8.0 * math.pi * a**3 * n**3))
    return e, f


@dataclass
class EvenResult:
    """Even channel at one geometry; ``report`` tracks the channel partial sums."""

    geometry: Geometry
    energy_paths: float
    force_paths: float
    energy_error: float
    force_error: float
    report: ConvergenceReport

    @property
    def pfa(self) -> float:
        return pfa_energy(self.geometry)

    @property
    def force_pfa(self) -> float:
        return pfa_force_value(self.geometry)

    @property
    def energy(self) -> float:
        return self.energy_paths + self.pfa

    @property
    def force(self) -> float:
        return self.force_paths + self.force_pfa


def even_series(geometry: Geometry, K: int) -> EvenResult:
    """Sum the even loops through shell ``K`` and extrapolate the tail."""
    k, e_k, f_k = even_shell_sums(geometry, K)
    e_cum = compensated_cumsum(e_k)
    f_cum = compensated_cumsum(f_k)
    e_lim, e_err = limit_estimate(k, e_cum)
    f_lim, f_err = limit_estimate(k, f_cum)
    pfa_e, _ = pfa_partial_sums(geometry, K)
    channel = np.concatenate([[pfa_e[0]], e_cum + pfa_e[1:]])
    orders = list(range(1, K + 1))
    value = e_lim + pfa_energy(geometry)
    report = ConvergenceReport("even", orders, channel.tolist(), value, e_err, Termination.CAP)
    return EvenResult(geometry, e_lim, f_lim, e_err, f_err, report)


def _max_shell(max_terms: int) -> int:
    return int((1 + math.isqrt(1 + 8 * max_terms)) // 2)


def even_energy(
    geometry: Geometry,
    tol: float = 1e-7,
    start: int = 64,
    max_terms: int = DEFAULT_MAX_TERMS,
    raise_on_cap: bool = False,
) -> EvenResult:
    """Even-loop energy and force, doubling the shell cutoff until converged.

    Converged means both the energy and force tail estimates are below
    ``tol`` relative to the full even channel (PFA included).  Hitting
    ``max_terms`` returns the best result with ``terminated_by = CAP``, or
    raises :class:`EvaluationError` if ``raise_on_cap``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    kmax = _max_shell(max_terms)
    K = min(max(start, 16), kmax)
    while True:
        res = even_series(geometry, K)
        ok = (res.energy_error <= tol * abs(res.energy)) and (res.force_error <= tol * abs(res.force))
        if ok:
            res.report.terminated_by = Termination.TOLERANCE
            return res
        if K >= kmax:
            if raise_on_cap:
                raise EvaluationError(
                    f"even sum not converged to {tol:g} within {max_terms} terms",
                    partial=res.energy,
                    achieved=res.energy_error / abs(res.energy),
                )
            return res
        K = min(2 * K, kmax)


def even_force(geometry: Geometry, tol: float = 1e-7, **kwargs) -> float:
    """``-d/da`` of the even paths plus PFA, from term-by-term derivatives."""
    return even_energy(geometry, tol, **kwargs).force


def even_energy_reduced(geometry: Geometry, m_max: int = 200_000) -> tuple[float, float]:
    """Even-path energy and force regrouped by primitive direction.

    Writing ``(n, m) = g (n~, m~)`` with coprime ``(n~, m~)``, every term
    scales as ``g^-3`` so the ``g`` sum is ``zeta(3)``, and bands close
    for ``n~ >= (s + 2h)/(2h)``.  This route is independent of the shell
    summation and is meant for ``h > 0`` (the direction sum is infinite
    at ``h = 0``).  Returns ``(energy, force)`` without the PFA part.
    """
    if geometry.h <= 0:
        raise ValueError("the regrouped sum needs h > 0")
    a, L, h = geometry.a, geometry.period, geometry.h
    nt_max = math.ceil(L / (2 * h)) - 1
    m = np.arange(1, m_max + 1, dtype=float)
    energy = 0.0
    force = 0.0
    for nt in range(1, nt_max + 1):
        occ = float(occupancy(geometry, nt))
        if occ <= 0:
            continue
        coprime = np.gcd(np.arange(1, m_max + 1), nt) == 1
        D = (2 * nt * a) ** 2 + (2 * m[coprime] * L) ** 2
        pref = -occ * 4 * nt / (4 * math.pi)
        e = pref * a * np.sum(D**-1.5)
        f = -pref * np.sum((D - 3 * (2 * nt * a) ** 2) / D**2.5)
        # coprime density phi(nt)/nt times the integral tail beyond m_max + 1/2
        dens = sum(1 for j in range(1, nt + 1) if math.gcd(j, nt) == 1) / nt
        M = m_max + 0.5
        c = 2 * nt * a
        b = 2 * L
        tail_e = dens * (1 - b * M / math.hypot(c, b * M)) / (b * c * c)
        tail_f_inner = dens * (1 / (b * c * c)) * (1 - b * M / math.hypot(c, b * M))
        tail_f_d = dens * (1 / (3 * b * c**4)) * (
            2 - (b * M) * (3 * c * c + 2 * (b * M) ** 2) / math.hypot(c, b * M) ** 3
        )
        e += pref * a * tail_e
        f += -pref * (tail_f_inner - 3 * c * c * tail_f_d)
        energy += e
        force += f
    return ZETA3 * energy, ZETA3 * force
