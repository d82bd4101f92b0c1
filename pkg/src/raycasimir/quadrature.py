"""Adaptive rectangle cubature for discontinuous integrands.

Each cell is integrated with the 2x2 and the 4x4 composite midpoint
rules; their difference is the cell error, and cells whose samples are
partly zero are charged extra so that jumps keep being refined.  Cells
are bisected across their longer side, largest errors first, until the
summed error meets the tolerance.  Low order is deliberate: the loop
integrands carry an escape indicator, and higher-order rules buy nothing
across a jump.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class CubatureSettings:
    rel_tol: float = 1e-4
    abs_tol: float = 1e-13
    max_level: int = 24
    initial_grid: int = 32
    max_evaluations: int = 20_000_000

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("tolerances must be positive")
        if not 1 <= self.max_level <= 60:
            raise ValueError("max_level must be in [1, 60]")


@dataclass
class CubatureResult:
    value: float
    error: float
    evaluations: int
    converged: bool
    cells: np.ndarray | None = field(default=None, repr=False)


_FINE = (np.arange(4) + 0.5) / 4 - 0.5
_COARSE = (np.arange(2) + 0.5) / 2 - 0.5
# corners and edge midpoints, used only to detect jumps
_PROBE_X = np.array([-0.5, 0.5, -0.5, 0.5, 0.0, 0.0, -0.5, 0.5])
_PROBE_Y = np.array([-0.5, -0.5, 0.5, 0.5, -0.5, 0.5, 0.0, 0.0])
SAMPLES_PER_CELL = 28


def _evaluate(f, xl, xr, yl, yr):
    wx = xr - xl
    wy = yr - yl
    xc = 0.5 * (xl + xr)
    yc = 0.5 * (yl + yr)
    fx, fy = (g.ravel() for g in np.meshgrid(_FINE, _FINE, indexing="ij"))
    cx, cy = (g.ravel() for g in np.meshgrid(_COARSE, _COARSE, indexing="ij"))
    ux = np.concatenate([fx, cx, _PROBE_X])
    uy = np.concatenate([fy, cy, _PROBE_Y])
    xs = (xc[None, :] + ux[:, None] * wx[None, :]).ravel()
    ys = (yc[None, :] + uy[:, None] * wy[None, :]).ravel()
    vals = np.asarray(f(xs, ys), dtype=float).reshape(SAMPLES_PER_CELL, len(xl))
    area = wx * wy
    fine = area * vals[:16].mean(axis=0)
    coarse = area * vals[16:20].mean(axis=0)
    err = np.abs(fine - coarse)
    # a cell whose samples are partly switched off straddles a jump that
    # the two rules can agree on by accident; charge it a share of its mass
    off = vals == 0.0
    mixed = off.any(axis=0) & ~off.all(axis=0)
    jump = 0.25 * area * np.abs(vals).max(axis=0)
    return fine, np.where(mixed, np.maximum(err, jump), err)


def integrate_2d(
    f: Callable[[np.ndarray, np.ndarray], np.ndarray],
    rect: tuple[float, float, float, float],
    settings: CubatureSettings = CubatureSettings(),
    keep_cells: bool = False,
) -> CubatureResult:
    """Integrate ``f(x, y)`` over ``rect = (x0, x1, y0, y1)``.

    ``f`` must accept equal-shape arrays and return finite values (zero
    wherever the integrand is switched off).  The result is flagged
    ``converged=False`` if the tolerance was not met before the level or
    evaluation caps; the best estimate is still returned.
    """
    x0, x1, y0, y1 = map(float, rect)
    if not (x1 > x0 and y1 > y0):
        raise ValueError(f"degenerate rectangle {rect}")
    g = settings.initial_grid
    ex = np.linspace(x0, x1, g + 1)
    ey = np.linspace(y0, y1, g + 1)
    XL, YL = np.meshgrid(ex[:-1], ey[:-1], indexing="ij")
    XR, YR = np.meshgrid(ex[1:], ey[1:], indexing="ij")
    xl, xr, yl, yr = (arr.ravel() for arr in (XL, XR, YL, YR))
    level = np.zeros(len(xl), dtype=int)
    val, err = _evaluate(f, xl, xr, yl, yr)
    evaluations = SAMPLES_PER_CELL * len(xl)
    converged = False
    while True:
        total = val.sum()
        total_err = err.sum()
        target = max(settings.abs_tol, settings.rel_tol * abs(total))
        if total_err <= target:
            converged = True
            break
        if evaluations >= settings.max_evaluations:
            break
        splittable = level < settings.max_level
        if not splittable.any():
            break
        order = np.argsort(-np.where(splittable, err, -1.0), kind="stable")
        cum = np.cumsum(err[order])
        # smallest prefix whose removal would bring the error under half the target
        need = total_err - 0.5 * target
        count = int(np.searchsorted(cum, need) + 1)
        count = min(count, int(splittable.sum()))
        budget = (settings.max_evaluations - evaluations) // (2 * SAMPLES_PER_CELL)
        count = max(1, min(count, budget)) if budget > 0 else 0
        if count == 0:
            break
        pick = np.sort(order[:count])
        keep = np.ones(len(xl), dtype=bool)
        keep[pick] = False
        pxl, pxr, pyl, pyr = xl[pick], xr[pick], yl[pick], yr[pick]
        split_x = (pxr - pxl) >= (pyr - pyl)
        mx = 0.5 * (pxl + pxr)
        my = 0.5 * (pyl + pyr)
        c1 = (pxl, np.where(split_x, mx, pxr), pyl, np.where(split_x, pyr, my))
        c2 = (np.where(split_x, mx, pxl), pxr, np.where(split_x, pyl, my), pyr)
        nxl = np.concatenate([c1[0], c2[0]])
        nxr = np.concatenate([c1[1], c2[1]])
        nyl = np.concatenate([c1[2], c2[2]])
        nyr = np.concatenate([c1[3], c2[3]])
        nval, nerr = _evaluate(f, nxl, nxr, nyl, nyr)
        evaluations += SAMPLES_PER_CELL * len(nxl)
        nlevel = np.concatenate([level[pick], level[pick]]) + 1
        xl = np.concatenate([xl[keep], nxl])
        xr = np.concatenate([xr[keep], nxr])
        yl = np.concatenate([yl[keep], nyl])
        yr = np.concatenate([yr[keep], nyr])
        val = np.concatenate([val[keep], nval])
        err = np.concatenate([err[keep], nerr])
        level = np.concatenate([level[keep], nlevel])
    # fixed reduction order: sort leaves by position so the sum is reproducible
    idx = np.lexsort((yl, xl))
    value = float(np.sum(val[idx]))
    cells = np.column_stack([xl, xr, yl, yr])[idx] if keep_cells else None
    return CubatureResult(value, float(err.sum()), evaluations, converged, cells)
