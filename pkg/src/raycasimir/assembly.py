"""Channel assembly, parameter sweeps and extremum location."""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .core import EnergyBreakdown, EvaluationError, ForceBreakdown, Geometry, pfa_force
from .even import DEFAULT_MAX_TERMS, EvenResult, even_energy, pfa_energy
from .odd import OddResult, odd_energy
from .piston import piston_force
from .series import ConvergenceReport

DEFAULT_TOL = 1e-4
DEFAULT_MAX_ORDER = 513


@dataclass
class ChannelResult:
    """Both channels at one geometry with their convergence histories."""

    geometry: Geometry
    even: EvenResult
    odd: OddResult
    tol: float

    @property
    def energy(self) -> EnergyBreakdown:
        return EnergyBreakdown(self.even.energy_paths, self.even.pfa, self.odd.energy)

    @property
    def force(self) -> ForceBreakdown:
        return ForceBreakdown(self.geometry, self.even.force_paths, self.even.force_pfa, self.odd.force, self.odd.force_error)

    @property
    def converged(self) -> bool:
        return self.even.report.converged and self.odd.report.converged

    @property
    def orders(self) -> tuple[int, int]:
        return self.even.report.max_order, self.odd.report.max_order

    @property
    def reports(self) -> dict[str, ConvergenceReport]:
        return {"even": self.even.report, "odd": self.odd.report, "odd-force": self.odd.force_report}


def evaluate(
    geometry: Geometry,
    tol: float = DEFAULT_TOL,
    max_order: int = DEFAULT_MAX_ORDER,
    max_terms: int = DEFAULT_MAX_TERMS,
) -> ChannelResult:
    """Even and odd channels, each summed until its tail error is below ``tol``.

    The odd channel is measured against the parallel-plate scale as well
    as its own size, since the odd force changes sign as ``h`` varies.
    """
    even = even_energy(geometry, tol=tol, max_terms=max_terms)
    scale = (abs(pfa_energy(geometry)), abs(pfa_force(geometry)))
    odd = odd_energy(geometry, tol=tol, max_order=max_order, scale=scale)
    return ChannelResult(geometry, even, odd, tol)


def energy_breakdown(geometry: Geometry, tol: float = DEFAULT_TOL, **kwargs) -> EnergyBreakdown:
    return evaluate(geometry, tol, **kwargs).energy


def force_breakdown(geometry: Geometry, tol: float = DEFAULT_TOL, **kwargs) -> ForceBreakdown:
    return evaluate(geometry, tol, **kwargs).force


@dataclass
class SweepRecord:
    """One row of a sweep; field names are the column names of the CSV output."""

    a: float
    s: float
    h: float
    F_even: float
    F_odd: float
    F_pfa: float
    F_neumann: float
    F_dirichlet: float
    F_total: float
    F_total_over_Fpfa: float
    converged: bool
    orders: str

    @classmethod
    def from_result(cls, res: ChannelResult) -> "SweepRecord":
        f = res.force
        g = res.geometry
        return cls(
            g.a, g.s, g.h, f.even, f.odd, f.f_pfa, f.neumann, f.dirichlet, f.total,
            f.normalized_by_pfa["total"], res.converged, "{};{}".format(*res.orders),
        )

    @classmethod
    def failed(cls, geometry: Geometry) -> "SweepRecord":
        nan = math.nan
        return cls(geometry.a, geometry.s, geometry.h, nan, nan, pfa_force(geometry), nan, nan, nan, nan, False, "")

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class Extremum:
    kind: str  # "min" or "max" of |F_total|
    x: float  # interpolated location
    value: float  # interpolated |F_total|
    grid_index: int


@dataclass
class SweepResult:
    records: list[SweepRecord]
    variable: str
    extrema: list[Extremum] = field(default_factory=list)
    piston: list[float] | None = None

    @property
    def converged(self) -> bool:
        return all(r.converged for r in self.records)

    @property
    def minimum(self) -> Extremum | None:
        mins = [e for e in self.extrema if e.kind == "min"]
        return min(mins, key=lambda e: e.value) if mins else None


def _point(args) -> SweepRecord:
    geometry, tol, max_order = args
    try:
        return SweepRecord.from_result(evaluate(geometry, tol, max_order))
    except (EvaluationError, FloatingPointError, ValueError):
        return SweepRecord.failed(geometry)


def _run(points: list[Geometry], tol: float, max_order: int, workers: int) -> list[SweepRecord]:
    jobs = [(g, tol, max_order) for g in points]
    if workers <= 1 or len(jobs) <= 1:
        return [_point(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        # map keeps input order, so output does not depend on scheduling
        return list(pool.map(_point, jobs))


def interior_extrema(x: Sequence[float], y: Sequence[float]) -> list[Extremum]:
    """Interior local extrema of ``y``, refined by a parabola through three points."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    out = []
    for i in range(1, len(x) - 1):
        y0, y1, y2 = y[i - 1], y[i], y[i + 1]
        if not np.all(np.isfinite([y0, y1, y2])):
            continue
        if y1 < y0 and y1 <= y2:
            kind = "min"
        elif y1 > y0 and y1 >= y2:
            kind = "max"
        else:
            continue
        coef = np.polyfit(x[i - 1 : i + 2], [y0, y1, y2], 2)
        if coef[0] == 0:
            out.append(Extremum(kind, float(x[i]), float(y1), i))
            continue
        xv = -coef[1] / (2 * coef[0])
        xv = min(max(xv, x[i - 1]), x[i + 1])
        out.append(Extremum(kind, float(xv), float(np.polyval(coef, xv)), i))
    return out


def sweep_h(
    a: float,
    s: float,
    h_grid: Sequence[float],
    tol: float = DEFAULT_TOL,
    max_order: int = DEFAULT_MAX_ORDER,
    workers: int = 1,
) -> SweepResult:
    """Forces on a grid of sidewall gaps, with extrema of ``|F_total|``.

    Points that fail are kept as rows with ``converged = False``.
    """
    h_grid = [float(h) for h in h_grid]
    if not h_grid:
        raise ValueError("empty h grid")
    points = [Geometry(a, s, h) for h in h_grid]
    records = _run(points, tol, max_order, workers)
    extrema = interior_extrema(h_grid, [abs(r.F_total) for r in records])
    return SweepResult(records, "h", extrema)


def sweep_a(
    h: float,
    s: float,
    a_grid: Sequence[float],
    tol: float = DEFAULT_TOL,
    max_order: int = DEFAULT_MAX_ORDER,
    normalize: str = "pfa",
    workers: int = 1,
) -> SweepResult:
    """Forces on a grid of square separations.

    With ``normalize="piston"`` the result also carries the ``h = 0``
    total force at each ``a`` in ``SweepResult.piston``.
    """
    if normalize not in ("pfa", "piston"):
        raise ValueError(f"normalize must be 'pfa' or 'piston', got {normalize!r}")
    a_grid = [float(a) for a in a_grid]
    if not a_grid:
        raise ValueError("empty a grid")
    points = [Geometry(a, s, h) for a in a_grid]
    records = _run(points, tol, max_order, workers)
    extrema = interior_extrema(a_grid, [abs(r.F_total) for r in records])
    piston = [piston_force(g).total for g in points] if normalize == "piston" else None
    return SweepResult(records, "a", extrema, piston)


def fit_power(x: Sequence[float], y: Sequence[float]) -> float:
    """Exponent of a least-squares power law ``|y| ~ x^k``."""
    x = np.asarray(x, dtype=float)
    y = np.abs(np.asarray(y, dtype=float))
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def convergence_study(geometry: Geometry, max_order: int, even_shells: int | None = None) -> dict[str, ConvergenceReport]:
    """Partial-sum histories of both channels at fixed cutoffs.

    The odd channel is summed through reflection order ``max_order``; the
    even channel through shell ``even_shells`` (default ``max_order``).
    """
    from .even import even_series
    from .odd import odd_series

    K = even_shells or max_order
    return {"even": even_series(geometry, K).report, "odd": odd_series(geometry, max_order).report}
