"""Domain types and energy/force bookkeeping.

Units: hbar*c = 1 and all lengths share one arbitrary unit, so energies
are in units of 1/length and forces in 1/length**2.  Energies are per
unit length along the invariant z direction.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

ZETA3 = 1.2020569031595942853997381615114499907649862923405


class EvaluationError(RuntimeError):
    """A lattice sum or integral failed to reach its requested accuracy.

    ``partial`` carries the best value obtained and ``achieved`` the
    error estimate that was reached when the work cap was hit.
    """

    def __init__(self, message, partial=None, achieved=None):
        super().__init__(message)
        self.partial = partial
        self.achieved = achieved


@dataclass(frozen=True)
class Geometry:
    """Two ``s x s`` squares a distance ``a`` apart, each a distance ``h``
    from an infinite parallel sidewall."""

    a: float
    s: float
    h: float = 0.0

    def __post_init__(self):
        for name in ("a", "s", "h"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
        if self.a <= 0 or self.s <= 0:
            raise ValueError(f"a and s must be positive, got a={self.a}, s={self.s}")
        if self.h < 0:
            raise ValueError(f"h must be non-negative, got {self.h}")

    @property
    def period(self) -> float:
        """Vertical period ``s + 2h`` of the unfolded mirror lattice."""
        return self.s + 2.0 * self.h

    def with_a(self, a: float) -> "Geometry":
        return Geometry(a, self.s, self.h)

    def with_h(self, h: float) -> "Geometry":
        return Geometry(self.a, self.s, h)

    def scaled(self, lam: float) -> "Geometry":
        return Geometry(lam * self.a, lam * self.s, lam * self.h)


class PathClass(enum.Enum):
    EVEN = "even"
    ODD = "odd"
    FORBIDDEN = "forbidden"


@dataclass(frozen=True)
class EnergyBreakdown:
    """Channel energies at one geometry.

    ``even_paths`` excludes the parallel-plate series, which is kept in
    ``pfa``.  The Neumann channel weights every loop by +1, the Dirichlet
    channel weights odd loops by -1.
    """

    even_paths: float
    pfa: float
    odd_paths: float

    @property
    def even(self) -> float:
        return self.even_paths + self.pfa

    @property
    def neumann(self) -> float:
        return to_polarizations(self.even, self.odd_paths)[0]

    @property
    def dirichlet(self) -> float:
        return to_polarizations(self.even, self.odd_paths)[1]

    @property
    def total(self) -> float:
        return to_polarizations(self.even, self.odd_paths)[2]

    def as_dict(self) -> dict:
        return {
            "even_paths": self.even_paths,
            "pfa": self.pfa,
            "odd_paths": self.odd_paths,
            "neumann": self.neumann,
            "dirichlet": self.dirichlet,
            "total": self.total,
        }


def pfa_force(geometry: Geometry) -> float:
    """Parallel-plate force between the facing walls, ``-zeta(3) s / (8 pi a^3)``."""
    return -ZETA3 * geometry.s / (8.0 * math.pi * geometry.a**3)


@dataclass(frozen=True)
class ForceBreakdown:
    """Channel forces ``-dE/da`` at one geometry (negative is attractive)."""

    geometry: Geometry
    even_paths: float
    pfa: float
    odd: float
    odd_error: float = 0.0

    @property
    def even(self) -> float:
        return self.even_paths + self.pfa

    @property
    def neumann(self) -> float:
        return self.even + self.odd

    @property
    def dirichlet(self) -> float:
        return self.even - self.odd

    @property
    def total(self) -> float:
        return 2.0 * self.even

    @property
    def f_pfa(self) -> float:
        return pfa_force(self.geometry)

    @property
    def normalized_by_pfa(self) -> dict:
        """Channels divided by the PFA force.

        Single-polarization channels use ``F_PFA``; the total uses the
        Neumann+Dirichlet PFA force ``2 F_PFA`` so that it tends to 1 as
        the squares approach each other.
        """
        f = self.f_pfa
        return {
            "even": self.even / f,
            "odd": self.odd / f,
            "neumann": self.neumann / f,
            "dirichlet": self.dirichlet / f,
            "total": self.total / (2.0 * f),
        }


def to_polarizations(even_total: float, odd: float) -> tuple[float, float, float]:
    """Map the even (PFA included) and odd channels to ``(neumann, dirichlet, total)``."""
    return even_total + odd, even_total - odd, 2.0 * even_total


def default_step(a: float) -> float:
    """Central-difference step ``max(a, 1) * eps**(1/3)``."""
    return max(a, 1.0) * np.finfo(float).eps ** (1.0 / 3.0)


@dataclass(frozen=True)
class DerivativeEstimate:
    value: float
    error: float


def force_from_energies(
    energy: Callable[[float], float] | Sequence[float],
    a: float | None = None,
    step: float | None = None,
) -> DerivativeEstimate:
    """Force ``-dE/da`` by a central difference.

    ``energy`` is either a callable ``E(a)`` (then ``a`` is required) or
    the three stencil values ``(E(a-step), E(a), E(a+step))``.  The error
    estimate is the difference between the step-``step`` and
    step-``2*step`` differences (callable form) or a rounding bound
    (stencil form).
    """
    if callable(energy):
        if a is None:
            raise ValueError("a is required when energy is callable")
        if step is None:
            step = default_step(a)
        lo, mid, hi = energy(a - step), energy(a), energy(a + step)
        values = (lo, mid, hi)
        if not all(map(math.isfinite, values)):
            raise EvaluationError(f"non-finite energy in stencil at a={a}: {values}")
        d1 = (hi - lo) / (2 * step)
        lo2, hi2 = energy(a - 2 * step), energy(a + 2 * step)
        d2 = (hi2 - lo2) / (4 * step)
        # Richardson: O(step^2) truncation, error ~ |d1 - d2| / 3
        err = abs(d1 - d2) / 3.0 + 4 * np.finfo(float).eps * abs(mid) / step
        return DerivativeEstimate(-d1, err)
    lo, mid, hi = energy
    if not all(map(math.isfinite, (lo, mid, hi))):
        raise EvaluationError(f"non-finite energy in stencil: {(lo, mid, hi)}")
    if step is None or step <= 0:
        raise ValueError("step must be positive for stencil input")
    d1 = (hi - lo) / (2 * step)
    return DerivativeEstimate(-d1, 2 * np.finfo(float).eps * max(abs(lo), abs(hi)) / step)


def compensated_cumsum(values: np.ndarray) -> np.ndarray:
    """Running sums with Neumaier compensation, in input order."""
    out = np.empty(len(values))
    total = 0.0
    comp = 0.0
    for i, v in enumerate(np.asarray(values, dtype=float)):
        t = total + v
        if abs(total) >= abs(v):
            comp += (total - t) + v
        else:
            comp += (v - t) + total
        total = t
        out[i] = total + comp
    return out
