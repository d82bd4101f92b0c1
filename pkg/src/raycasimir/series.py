"""Partial sums over reflection order and their tail extrapolation.

Both loop series converge like ``S_r = S + c1/r + c2/r^2 + ...`` (the
number of loops of order ``r`` grows like ``r`` while each one falls like
``1/r^3``).  The limit is estimated by a least-squares fit of that model
on the upper half of the computed orders, and its error by comparing
with the same fit one octave lower.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np


class Termination(enum.Enum):
    TOLERANCE = "tolerance"
    CAP = "cap"


def extrapolate_tail(orders, sums, lo: float, hi: float) -> float:
    """Fit ``S + c1/r + c2/r^2`` to the partial sums with ``lo <= r <= hi``."""
    orders = np.asarray(orders, dtype=float)
    sums = np.asarray(sums, dtype=float)
    sel = (orders >= lo) & (orders <= hi)
    x = 1.0 / orders[sel]
    y = sums[sel]
    if len(x) >= 6:
        design = np.column_stack([np.ones_like(x), x, x * x])
    elif len(x) >= 2:
        design = np.column_stack([np.ones_like(x), x])
    else:
        return float(sums[orders <= hi][-1])
    # centre the target to keep the solve well conditioned
    shift = y[-1]
    coef, *_ = np.linalg.lstsq(design, y - shift, rcond=None)
    return float(coef[0] + shift)


def limit_estimate(orders, sums) -> tuple[float, float]:
    """Extrapolated limit and its error estimate from the full partial-sum history."""
    orders = np.asarray(orders, dtype=float)
    top = orders[-1]
    upper = extrapolate_tail(orders, sums, top / 2, top)
    lower = extrapolate_tail(orders, sums, top / 4, top / 2)
    return upper, abs(upper - lower)


def fit_log_slope(orders, values, r_min: float | None = None, r_max: float | None = None) -> float:
    """Slope of ``log|values|`` against ``log(orders)``; zeros are skipped."""
    orders = np.asarray(orders, dtype=float)
    values = np.abs(np.asarray(values, dtype=float))
    sel = values > 0
    if r_min is not None:
        sel &= orders >= r_min
    if r_max is not None:
        sel &= orders <= r_max
    if sel.sum() < 4:
        raise ValueError("need at least four nonzero points for a slope fit")
    return float(np.polyfit(np.log(orders[sel]), np.log(values[sel]), 1)[0])


@dataclass
class ConvergenceReport:
    """History of one channel's partial sums over reflection order."""

    channel: str
    orders: list[int]
    partial: list[float]
    value: float
    error: float
    terminated_by: Termination
    successive_rel_diffs: list[float] = field(init=False)
    fitted_slope: float | None = field(init=False)

    def __post_init__(self):
        p = np.asarray(self.partial, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            rel = np.where(p[:-1] != 0, (p[1:] - p[:-1]) / p[:-1], 0.0)
        self.successive_rel_diffs = rel.tolist()
        try:
            self.fitted_slope = fit_log_slope(self.orders[:-1], rel, r_min=self.orders[-1] / 8)
        except ValueError:
            self.fitted_slope = None

    @property
    def converged(self) -> bool:
        return self.terminated_by is Termination.TOLERANCE

    @property
    def max_order(self) -> int:
        return int(self.orders[-1])

    def summary(self) -> dict:
        return {
            "channel": self.channel,
            "max_order": self.max_order,
            "value": self.value,
            "error": self.error,
            "fitted_slope": self.fitted_slope,
            "terminated_by": self.terminated_by.value,
        }
