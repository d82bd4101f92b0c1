"""Unfolded mirror lattice for the squares + sidewalls cell.

The unit cell is ``x in [0, a]``, ``y in [0, L]`` with ``L = s + 2h``.
The facing walls of the squares sit on ``x = 0`` and ``x = a`` for
``y in [h, h + s]``; the sidewalls are the lines ``y = 0`` and ``y = L``.
Unfolding every specular reflection produces mirror lines ``x = k a``
(reflecting only where the folded ordinate lies on a wall) and
``y = k L`` (always reflecting).

Images are labelled by raw cell offsets ``(p, q)``: the image of a start
point in cell ``(p, q)`` is reached after ``|p|`` reflections off the
squares and ``|q|`` off the sidewalls.  Even images have both offsets
even; in the even-path formulas they are addressed by the half offsets
``(n, m) = (p/2, q/2)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .core import Geometry, PathClass

# Relative band (in units of L) inside which a wall crossing counts as
# grazing a wall edge and is treated as an escape.
TANGENCY_TOL = 1e-12


@dataclass(frozen=True)
class LatticeIndex:
    n: int
    m: int

    @property
    def reduced(self) -> tuple[int, int]:
        g = math.gcd(abs(self.n), abs(self.m))
        if g == 0:
            return (0, 0)
        return (self.n // g, self.m // g)

    @property
    def n_reduced(self) -> int:
        return self.reduced[0]

    @property
    def m_reduced(self) -> int:
        return self.reduced[1]


@dataclass(frozen=True)
class UnitCell:
    a: float
    period: float
    wall: tuple[float, float]

    @classmethod
    def from_geometry(cls, geometry: Geometry) -> "UnitCell":
        return cls(geometry.a, geometry.period, (geometry.h, geometry.h + geometry.s))


@dataclass(frozen=True)
class ImagePoint:
    """Mirror image of a start point in cell ``index = (p, q)``."""

    index: LatticeIndex
    position: tuple[float, float] | None = None

    @property
    def h_parity(self) -> int:
        return self.index.n % 2

    @property
    def v_parity(self) -> int:
        return self.index.m % 2

    @property
    def order(self) -> int:
        return abs(self.index.n) + abs(self.index.m)

    @property
    def path_class(self) -> PathClass:
        return classify(self.h_parity, self.v_parity)


def classify(h_parity: int, v_parity: int) -> PathClass:
    """Parity class of a loop from its horizontal/vertical reflection parities."""
    h_odd, v_odd = h_parity % 2, v_parity % 2
    if h_odd and v_odd:
        return PathClass.FORBIDDEN
    if h_odd or v_odd:
        return PathClass.ODD
    return PathClass.EVEN


def fold(y, period):
    """Reflect-tile ``y`` onto ``[0, period]`` (triangle wave of period ``2*period``)."""
    y = np.mod(y, 2.0 * period)
    return np.where(y > period, 2.0 * period - y, y)


def image_position(geometry: Geometry, start, p: int, q: int):
    """Unfolded coordinates of the ``(p, q)`` image of ``start = (x0, y0)``.

    Works elementwise on array starts.
    """
    x0, y0 = start
    a, L = geometry.a, geometry.period
    x = p * a + x0 if p % 2 == 0 else (p + 1) * a - np.asarray(x0)
    y = q * L + y0 if q % 2 == 0 else (q + 1) * L - np.asarray(y0)
    return x, y


def path_length_even(geometry: Geometry, n: int, m: int) -> float:
    """Length of the even loop to half-offset image ``(n, m)``."""
    if n == 0 and m == 0:
        raise ValueError("(n, m) = (0, 0) is not a loop")
    return math.hypot(2 * n * geometry.a, 2 * m * geometry.period)


def path_length_odd(geometry: Geometry, image: ImagePoint | tuple[int, int], start):
    """Start-dependent length of an odd loop (elementwise on array starts)."""
    p, q = _offsets(image)
    if classify(p, q) is not PathClass.ODD:
        raise ValueError(f"image {(p, q)} is not odd")
    x, y = image_position(geometry, start, p, q)
    return np.hypot(x - np.asarray(start[0]), y - np.asarray(start[1]))


def _offsets(image) -> tuple[int, int]:
    if isinstance(image, ImagePoint):
        return image.index.n, image.index.m
    p, q = image
    return int(p), int(q)


def crossing_lines(p: int) -> range:
    """Indices ``k`` of the mirror lines ``x = k a`` crossed on the way to cell ``p``."""
    return range(1, p + 1) if p > 0 else range(p + 1, 1)


def is_allowed(geometry: Geometry, start, image) -> np.ndarray:
    """Whether the straight segment from ``start`` to ``image`` is a closed loop.

    ``start`` is ``(x0, y0)`` with scalars or equal-shape arrays inside the
    open cell.  Every crossing of a line ``x = k a`` has to land on a
    square wall, i.e. its folded ordinate must lie in ``(h, h + s)``;
    grazing a wall edge counts as escaping.  Sidewall crossings never
    escape.
    """
    p, q = _offsets(image)
    x0 = np.asarray(start[0], dtype=float)
    y0 = np.asarray(start[1], dtype=float)
    X, Y = image_position(geometry, (x0, y0), p, q)
    a, L, h, s = geometry.a, geometry.period, geometry.h, geometry.s
    ok = np.ones(np.broadcast(x0, y0).shape, dtype=bool)
    if p == 0:
        return ok
    lo = h + TANGENCY_TOL * L
    hi = h + s - TANGENCY_TOL * L
    # a vertical ray gives a nan ordinate, which fails both comparisons
    with np.errstate(divide="ignore", invalid="ignore"):
        slope = (Y - y0) / (X - x0)
        for k in crossing_lines(p):
            yk = fold(y0 + (k * a - x0) * slope, L)
            ok &= (yk > lo) & (yk < hi)
    return ok


def enumerate_images(max_order: int, start=None, geometry: Geometry | None = None) -> Iterator[ImagePoint]:
    """All images with reflection order ``1 <= |p| + |q| <= max_order``.

    Ordered by increasing order, then lexicographically by ``(p, q)``.
    Even, odd and forbidden images are all produced; positions are filled
    in when both ``start`` and ``geometry`` are supplied.
    """
    if max_order < 1:
        raise ValueError("max_order must be >= 1")
    for r in range(1, max_order + 1):
        cells = sorted({(p, sign * (r - abs(p))) for p in range(-r, r + 1) for sign in (1, -1)})
        for p, q in cells:
            pos = None
            if start is not None and geometry is not None:
                x, y = image_position(geometry, start, p, q)
                pos = (float(x), float(y))
            yield ImagePoint(LatticeIndex(p, q), pos)
