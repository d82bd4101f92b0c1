"""Odd loops: one reflection parity odd, the other even.

Every odd image ``(p, q)`` in the first quadrant stands for four sign
images with the same energy, so the engine works with quadrant
representatives and multiplies by four.  Two orientations occur:

* ``y``-families, ``p = 2n`` and ``q = 2M - 1``: the loop length depends
  only on the start height.  With ``tau = (M (s+2h) - y0)/n`` the loop
  crosses the square lines at heights that are a fixed set of points
  ``-j tau mod (s+2h)``, shifted by a variable in ``(0, tau)``.
* ``x``-families, ``p = 2n' - 1`` and ``q = 2m``: the length depends
  only on the start abscissa.  With ``tau = a m (s+2h) / (n' a - x0)``
  the crossings are ``-j tau`` shifted by the start height.

For fixed ``tau`` the allowed set is a union of arcs of the circle
``R / (s+2h)``, and its measure ``Meas(tau)`` is piecewise linear with
kinks where two crossing points come within ``0, h`` or ``2h`` of each
other.  The remaining one-dimensional integral against the loop-length
kernel then has a closed-form antiderivative on each linear piece, so
energies and their ``a``-derivatives are exact up to rounding.

A brute-force route (:func:`family_energy_cubature`) integrates the
indicator of unobstructed start points directly and is used as a check.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .core import EvaluationError, Geometry, compensated_cumsum
from .lattice import is_allowed
from .quadrature import CubatureSettings, integrate_2d
from .series import ConvergenceReport, Termination, limit_estimate

# below this h/s the allowed set is taken to be the whole cell
SMALL_H = 1e-8


class Orientation(enum.Enum):
    Y = "y"  # length depends on start height
    X = "x"  # length depends on start abscissa


@dataclass(frozen=True)
class OddFamily:
    """Quadrant representative of four odd images of equal energy."""

    orientation: Orientation
    i: int  # n for Y-families, n' for X-families
    j: int  # M for Y-families, m for X-families

    @property
    def offsets(self) -> tuple[int, int]:
        if self.orientation is Orientation.Y:
            return 2 * self.i, 2 * self.j - 1
        return 2 * self.i - 1, 2 * self.j

    @property
    def order(self) -> int:
        p, q = self.offsets
        return p + q

    multiplicity = 4


def families_of_order(r: int) -> list[OddFamily]:
    """The ``r - 1`` quadrant families of odd order ``r`` (axis loops excluded)."""
    if r < 3 or r % 2 == 0:
        return []
    half = (r + 1) // 2
    fams = [OddFamily(Orientation.Y, n, half - n) for n in range(1, half)]
    fams += [OddFamily(Orientation.X, n, half - n) for n in range(1, half)]
    return fams


def iter_families(max_order: int) -> Iterator[OddFamily]:
    for r in range(3, max_order + 1, 2):
        yield from families_of_order(r)


# --- closed forms for the three-reflection loops -------------------------

def energy21(geometry: Geometry) -> float:
    """Energy of one ``(2, 1)`` image (two square bounces, one sidewall).

    The loop length depends on the start height only; starts whose
    crossings fall in a gap are cut off, which adds the ``h log h`` term.
    """
    a, s, h = geometry.a, geometry.s, geometry.h
    L = geometry.period
    poly = s * a / math.hypot(a, L)
    if h < SMALL_H * s:
        return -poly / (32 * math.pi * a * a)
    ratio = (L / (2 * h)) * (1 + math.hypot(1, 2 * h / a)) / (1 + math.hypot(1, L / a))
    return -(poly - 2 * h * math.log(ratio)) / (32 * math.pi * a * a)


def energy12(geometry: Geometry) -> float:
    """Energy of one ``(1, 2)`` image.

    The length depends on ``x0`` alone and only starts more than ``h``
    from both sidewalls survive, giving ``-s a / (32 pi L^2 sqrt(a^2 + L^2))``
    with ``L = s + 2h``.
    """
    a, L = geometry.a, geometry.period
    band = L - 2 * geometry.h if geometry.h >= SMALL_H * geometry.s else L
    return -band * a / (32 * math.pi * L * L * math.hypot(a, L))


def odd_energy_analytic3(geometry: Geometry) -> float:
    """All order-three odd loops: four images each of ``(2,1)`` and ``(1,2)``."""
    return 4 * (energy21(geometry) + energy12(geometry))


# --- allowed measure ------------------------------------------------------

def circle_gaps(alpha, N) -> tuple[np.ndarray, np.ndarray]:
    """Gaps between the points ``j alpha mod 1``, ``j = 0..N``, on the unit circle.

    By the three-distance theorem there are at most three gap lengths;
    they and their multiplicities follow from the continued fraction of
    ``alpha``.  Returns ``(lengths, counts)``, each of shape ``(3, len(alpha))``.
    """
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    N = np.broadcast_to(np.asarray(N, dtype=np.int64), alpha.shape)
    eta_prev = np.ones_like(alpha)
    eta = alpha.copy()
    q_prev = np.zeros(alpha.shape, dtype=np.int64)
    q = np.ones(alpha.shape, dtype=np.int64)
    done = np.zeros(alpha.shape, dtype=bool)
    eta_k, eta_km1 = np.zeros_like(alpha), np.zeros_like(alpha)
    q_k, q_km1 = np.ones(alpha.shape, dtype=np.int64), np.zeros(alpha.shape, dtype=np.int64)
    while not done.all():
        with np.errstate(divide="ignore", over="ignore"):
            partial = np.where(eta > 0, np.floor(eta_prev / np.where(eta > 0, eta, 1.0)), np.inf)
        a = np.minimum(partial, N + 1).astype(np.int64)
        q_next = a * q + q_prev
        stop = ~done & (N < q_next + q)
        eta_k[stop], eta_km1[stop] = eta[stop], eta_prev[stop]
        q_k[stop], q_km1[stop] = q[stop], q_prev[stop]
        done |= stop
        eta_prev, eta = eta, eta_prev - np.where(np.isinf(partial), 0.0, partial) * eta
        q_prev, q = q, q_next
    r, s = np.divmod(N - q_km1, q_k)
    lengths = np.stack([eta_k, eta_km1 - r * eta_k, eta_km1 - (r - 1) * eta_k])
    counts = np.stack([N + 1 - q_k, s + 1, q_k - s - 1])
    return lengths, counts


def allowed_total(tau, npoints, L: float, h: float) -> np.ndarray:
    """Total length of the allowed arcs left by ``npoints`` consecutive
    multiples of ``tau`` on a circle of length ``L``, each blocking ``h``
    on either side."""
    alpha = np.mod(np.asarray(tau, dtype=float) / L, 1.0)
    lengths, counts = circle_gaps(alpha, np.asarray(npoints) - 1)
    return L * np.sum(counts * np.maximum(lengths - 2 * h / L, 0.0), axis=0)


def _arcs(tau: np.ndarray, j: np.ndarray, L: float, h: float):
    """Start and length of the allowed arc after each point ``-j tau mod L``."""
    pts = np.sort(np.mod(-np.outer(tau, j), L), axis=1)
    gaps = np.diff(pts, axis=1, append=pts[:, :1] + L)
    return pts + h, np.maximum(gaps - 2 * h, 0.0)


def measure_y(tau, n: int, L: float, h: float) -> np.ndarray:
    """``Meas`` for a ``y``-family with horizontal index ``n``.

    The allowed fraction of start abscissae is ``Meas / tau``.
    """
    tau = np.atleast_1d(np.asarray(tau, dtype=float))
    lo, width = _arcs(tau, np.arange(1 - n, n + 1), L, h)
    total = width.sum(axis=1)
    wraps = np.floor(-tau / L)
    y = (-tau - wraps * L)[:, None]
    # allowed length inside [0, y), including arcs that run past L
    part = np.clip(y - lo, 0.0, width)
    part += np.maximum(0.0, np.minimum(lo + width, L + y) - np.maximum(lo, L))
    return -(wraps * total + part.sum(axis=1))


def measure_x(tau, n_prime: int, L: float, h: float) -> np.ndarray:
    """``Meas`` for an ``x``-family: the measure of allowed start heights."""
    return allowed_total(tau, 2 * n_prime - 1, L, h)


def measure_x_sorted(tau, n_prime: int, L: float, h: float) -> np.ndarray:
    """Same as :func:`measure_x` by sorting the points (reference version)."""
    tau = np.atleast_1d(np.asarray(tau, dtype=float))
    _, width = _arcs(tau, np.arange(-(n_prime - 1), n_prime), L, h)
    return width.sum(axis=1)


def _breakpoints(fam_lo, fam_hi, dmax, L: float, shifts) -> tuple[np.ndarray, np.ndarray]:
    """Sorted nodes ``(family, tau)`` of every family's piecewise-linear measure.

    Nodes are the family's ends plus all ``(k L + e)/d`` strictly inside,
    for ``1 <= d <= dmax`` and ``e`` in ``shifts``.  Nodes closer than
    rounding are merged.
    """
    F = len(fam_lo)
    if F == 0:
        return np.zeros(0, dtype=int), np.zeros(0)
    shifts = np.asarray(shifts, dtype=float)
    fam = np.repeat(np.arange(F), dmax)
    first = np.cumsum(dmax) - dmax
    d = (np.arange(len(fam)) - np.repeat(first, dmax) + 1).astype(float)
    fam = np.repeat(fam, len(shifts))
    d = np.repeat(d, len(shifts))
    e = np.tile(shifts, len(d) // max(len(shifts), 1))
    lo, hi = fam_lo[fam], fam_hi[fam]
    k0 = np.ceil((lo * d - e) / L)
    k1 = np.floor((hi * d - e) / L)
    count = np.maximum(k1 - k0 + 1, 0).astype(np.int64)
    rep = np.repeat(np.arange(len(d)), count)
    start = np.cumsum(count) - count
    k = k0[rep] + (np.arange(count.sum()) - start[rep])
    tau = (k * L + e[rep]) / d[rep]
    fam_t = fam[rep]
    inside = (tau > fam_lo[fam_t]) & (tau < fam_hi[fam_t])
    fam_t = np.concatenate([np.arange(F), np.arange(F), fam_t[inside]])
    tau = np.concatenate([fam_lo, fam_hi, tau[inside]])
    order = np.lexsort((tau, fam_t))
    fam_t, tau = fam_t[order], tau[order]
    same = fam_t[1:] == fam_t[:-1]
    close = np.diff(tau) <= 1e-14 * np.maximum(fam_hi[fam_t[1:]], 1.0)
    keep = np.concatenate([[True], ~(same & close)])
    fam_t, tau = fam_t[keep], tau[keep]
    last = np.concatenate([fam_t[1:] != fam_t[:-1], [True]])
    tau[last] = fam_hi[fam_t[last]]
    return fam_t, tau


def _pieces(fam_t, tau, meas):
    """Linear pieces between consecutive nodes of the same family.

    ``Meas`` is continuous, so its node values fix each piece; a piece
    starting at ``tau = 0`` goes through the origin.
    """
    inner = fam_t[1:] == fam_t[:-1]
    lo, hi = tau[:-1][inner], tau[1:][inner]
    m_lo, m_hi = meas[:-1][inner], meas[1:][inner]
    B = (m_hi - m_lo) / (hi - lo)
    A = m_lo - B * lo
    origin = lo == 0.0
    A[origin] = 0.0
    B[origin] = m_hi[origin] / hi[origin]
    fam = fam_t[:-1][inner]
    live = (A != 0) | (B != 0)
    return fam[live], lo[live], hi[live], A[live], B[live]


def _y_integrals(a, lo, hi, A, B):
    """Per piece ``int (A + B t)/(t u^3)`` and ``int (A + B t)/(t u^5)``, ``u^2 = a^2 + t^2``."""

    def u(t):
        return np.sqrt(a * a + t * t)

    def log_term(t):
        return np.log(t / (u(t) + a))

    def i1(t):  # int dt / u^3
        return t / (a * a * u(t))

    def i2(t):  # int dt / (t u^3)
        return 1 / (a * a * u(t)) + log_term(t) / a**3

    def k1(t):  # int dt / u^5
        return t * (2 * t * t + 3 * a * a) / (3 * a**4 * u(t) ** 3)

    def k2(t):  # int dt / (t u^5)
        return 1 / (3 * a * a * u(t) ** 3) + 1 / (a**4 * u(t)) + log_term(t) / a**5

    base = B * (i1(hi) - i1(lo))
    fifth = B * (k1(hi) - k1(lo))
    # A vanishes on pieces touching the origin, where the log terms diverge
    s = A != 0
    base[s] += A[s] * (i2(hi[s]) - i2(lo[s]))
    fifth[s] += A[s] * (k2(hi[s]) - k2(lo[s]))
    return base, fifth


def _x_integrals(a, lo, hi, A, B):
    """Per piece ``int (A + B t) t / u^3`` and ``int (A + B t) t / u^5``; ``hi`` may be infinite
    when ``B = 0``."""

    def u(t):
        return np.sqrt(a * a + t * t)

    def j1(t):  # int t / u^3
        return -1 / u(t)

    def j2(t):  # int t^2 / u^3
        return np.arcsinh(t / a) - t / u(t)

    def l1(t):  # int t / u^5
        return -1 / (3 * u(t) ** 3)

    def l2(t):  # int t^2 / u^5
        return t**3 / (3 * a * a * u(t) ** 3)

    unbounded = np.isinf(hi)
    if np.any(unbounded & (B != 0)):
        raise EvaluationError("unbounded linear piece", partial=math.nan, achieved=math.inf)
    hi_f = np.where(unbounded, lo, hi)
    base = np.where(unbounded, A / u(lo), A * (j1(hi_f) - j1(lo)) + B * (j2(hi_f) - j2(lo)))
    fifth = np.where(unbounded, A / (3 * u(lo) ** 3), A * (l1(hi_f) - l1(lo)) + B * (l2(hi_f) - l2(lo)))
    return base, fifth


def _y_batch(geometry: Geometry, n: np.ndarray, M: np.ndarray):
    a, L, h = geometry.a, geometry.period, geometry.h
    F = len(n)
    lo_f = (M - 1) * L / n
    hi_f = M * L / n
    if h < SMALL_H * geometry.s:
        fam, lo, hi, A, B = np.arange(F), lo_f, hi_f, np.zeros(F), np.ones(F)
    else:
        fam_t, tau = _breakpoints(lo_f, hi_f, 2 * n - 1, L, (0.0, h, -h, 2 * h, -2 * h))
        nn = n[fam_t]
        # Meas vanishes on any piece with no open arc at either end, so the
        # full sorted measure is only needed next to open nodes
        open_ = allowed_total(tau, 2 * nn, L, h) > 0
        need = open_.copy()
        need[:-1] |= open_[1:] & (fam_t[1:] == fam_t[:-1])
        need[1:] |= open_[:-1] & (fam_t[1:] == fam_t[:-1])
        meas = np.zeros(len(tau))
        for k in np.unique(nn[need]):
            sel = need & (nn == k)
            meas[sel] = measure_y(tau[sel], int(k), L, h)
        fam, lo, hi, A, B = _pieces(fam_t, tau, meas)
    base, fifth = _y_integrals(a, lo, hi, A, B)
    pref = -1.0 / (32 * math.pi * n.astype(float) ** 2)
    return np.bincount(fam, base, F), np.bincount(fam, fifth, F), pref


def _x_batch(geometry: Geometry, npr: np.ndarray, m: np.ndarray):
    a, L, h = geometry.a, geometry.period, geometry.h
    F = len(npr)
    lo_f = m * L / npr
    with np.errstate(divide="ignore"):
        hi_f = np.where(npr > 1, m * L / np.maximum(npr - 1, 1), np.inf)
    one = npr == 1
    if h < SMALL_H * geometry.s:
        fam, lo, hi, A, B = np.arange(F), lo_f, hi_f, np.full(F, L), np.zeros(F)
    else:
        # n' = 1: a single point on the circle, constant measure L - 2h
        fam1 = np.flatnonzero(one)
        A1 = np.full(len(fam1), max(L - 2 * h, 0.0))
        multi = np.flatnonzero(~one)
        fam_t, tau = _breakpoints(lo_f[multi], hi_f[multi], 2 * (npr[multi] - 1), L, (0.0, 2 * h, -2 * h))
        meas = allowed_total(tau, 2 * npr[multi][fam_t] - 1, L, h)
        famm, lom, him, Am, Bm = _pieces(fam_t, tau, meas)
        fam = np.concatenate([fam1, multi[famm]])
        lo = np.concatenate([lo_f[fam1], lom])
        hi = np.concatenate([hi_f[fam1], him])
        A = np.concatenate([A1, Am])
        B = np.concatenate([np.zeros(len(fam1)), Bm])
    base, fifth = _x_integrals(a, lo, hi, A, B)
    pref = -1.0 / (32 * math.pi * m.astype(float) ** 2 * L * L)
    return np.bincount(fam, base, F), np.bincount(fam, fifth, F), pref


def families_energy(geometry: Geometry, families) -> tuple[np.ndarray, np.ndarray]:
    """Energies and forces (``-dE/da``) of many families, exact measure."""
    families = list(families)
    energy = np.zeros(len(families))
    force = np.zeros(len(families))
    a = geometry.a
    for orient, batch in ((Orientation.Y, _y_batch), (Orientation.X, _x_batch)):
        idx = np.array([k for k, f in enumerate(families) if f.orientation is orient], dtype=int)
        if len(idx) == 0:
            continue
        i = np.array([families[k].i for k in idx], dtype=np.int64)
        j = np.array([families[k].j for k in idx], dtype=np.int64)
        base, fifth, pref = batch(geometry, i, j)
        mult = OddFamily.multiplicity
        energy[idx] = mult * pref * a * base
        # d/da [a / u^3] = 1/u^3 - 3 a^2 / u^5 under a fixed tau measure
        force[idx] = -mult * pref * (base - 3 * a * a * fifth)
    return energy, force


def family_energy(geometry: Geometry, family: OddFamily) -> tuple[float, float]:
    """Energy and force of one family's four images."""
    e, f = families_energy(geometry, [family])
    return float(e[0]), float(f[0])


def family_energy_cubature(
    geometry: Geometry, family: OddFamily, settings: CubatureSettings | None = None
):
    """Brute-force energy of a family: cubature of ``1/l^3`` over unobstructed starts."""
    p, q = family.offsets
    a, L = geometry.a, geometry.period

    def integrand(x, y):
        xi = p * a + x if p % 2 == 0 else (p + 1) * a - x
        yi = q * L + y if q % 2 == 0 else (q + 1) * L - y
        ell = np.hypot(xi - x, yi - y)
        ok = is_allowed(geometry, (x, y), (p, q))
        return np.where(ok, 1.0 / ell**3, 0.0)

    res = integrate_2d(integrand, (0.0, a, 0.0, L), settings or CubatureSettings())
    scale = -OddFamily.multiplicity / (4 * math.pi)
    return scale * res.value, abs(scale) * res.error


# --- order-by-order sums ---------------------------------------------------

@dataclass
class OddResult:
    geometry: Geometry
    energy: float
    force: float
    energy_error: float
    force_error: float
    report: ConvergenceReport
    force_report: ConvergenceReport
    families: dict[OddFamily, tuple[float, float]]


def order_contributions(geometry: Geometry, max_order: int, first: int = 3, keep_families: bool = False):
    """Per-order energy and force for odd ``r`` from ``first`` to ``max_order``."""
    orders = np.arange(first | 1, max_order + 1, 2)
    e_r = np.zeros(len(orders))
    f_r = np.zeros(len(orders))
    fams: dict[OddFamily, tuple[float, float]] = {}
    for k, r in enumerate(orders):
        members = families_of_order(int(r))
        e, f = families_energy(geometry, members)
        e_r[k] = math.fsum(e)
        f_r[k] = math.fsum(f)
        if keep_families:
            fams.update(zip(members, zip(e.tolist(), f.tolist())))
    return orders, e_r, f_r, fams


def _summarise(geometry, orders, e_r, f_r, fams, terminated) -> OddResult:
    e_cum = compensated_cumsum(e_r)
    f_cum = compensated_cumsum(f_r)
    e_lim, e_err = limit_estimate(orders, e_cum)
    f_lim, f_err = limit_estimate(orders, f_cum)
    rep = ConvergenceReport("odd", orders.tolist(), e_cum.tolist(), e_lim, e_err, terminated)
    frep = ConvergenceReport("odd-force", orders.tolist(), f_cum.tolist(), f_lim, f_err, terminated)
    return OddResult(geometry, e_lim, f_lim, e_err, f_err, rep, frep, fams)


def odd_series(geometry: Geometry, max_order: int, keep_families: bool = False) -> OddResult:
    """Odd sums through ``max_order`` with the tail extrapolated."""
    if max_order < 3:
        raise ValueError("max_order must be >= 3")
    orders, e_r, f_r, fams = order_contributions(geometry, max_order, keep_families=keep_families)
    return _summarise(geometry, orders, e_r, f_r, fams, Termination.CAP)


def odd_energy(
    geometry: Geometry,
    tol: float = 1e-6,
    start: int = 33,
    max_order: int = 257,
    scale: tuple[float, float] = (0.0, 0.0),
    raise_on_cap: bool = False,
) -> OddResult:
    """Odd energy and force, doubling the order cutoff until both converge.

    Converged means each tail error is below ``tol * max(|value|, scale)``
    for energy and force respectively; a nonzero ``scale`` keeps the test
    meaningful where the odd force changes sign.  Orders already summed
    are reused between rounds.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    cap = max(max_order | 1, 3)
    R = min(max(start, 9) | 1, cap)
    orders = np.zeros(0, dtype=int)
    e_r = np.zeros(0)
    f_r = np.zeros(0)
    while True:
        first = int(orders[-1]) + 2 if len(orders) else 3
        o, e, f, _ = order_contributions(geometry, R, first)
        orders = np.concatenate([orders, o])
        e_r = np.concatenate([e_r, e])
        f_r = np.concatenate([f_r, f])
        res = _summarise(geometry, orders, e_r, f_r, {}, Termination.CAP)
        e_ok = res.energy_error <= tol * max(abs(res.energy), scale[0])
        f_ok = res.force_error <= tol * max(abs(res.force), scale[1])
        if e_ok and f_ok:
            res.report.terminated_by = Termination.TOLERANCE
            res.force_report.terminated_by = Termination.TOLERANCE
            return res
        if R >= cap:
            if raise_on_cap:
                raise EvaluationError(
                    f"odd sum not converged to {tol:g} by order {cap}",
                    partial=res.energy,
                    achieved=res.energy_error / max(abs(res.energy), 1e-300),
                )
            return res
        R = min(2 * R + 1, cap)


def odd_energy_numeric(geometry: Geometry, max_order: int, method: str = "exact", settings=None):
    """Odd energy summed to ``max_order`` without extrapolation.

    ``method`` is ``"exact"`` (piecewise-linear measure) or ``"cubature"``
    (adaptive integration of the start-point indicator).  Returns the
    total and the per-family energies.
    """
    fams = {}
    for fam in iter_families(max_order):
        if method == "exact":
            fams[fam] = family_energy(geometry, fam)[0]
        elif method == "cubature":
            fams[fam] = family_energy_cubature(geometry, fam, settings)[0]
        else:
            raise ValueError(f"unknown method {method!r}")
    return math.fsum(fams.values()), fams
