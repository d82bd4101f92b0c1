import math

import mpmath
import pytest

from raycasimir.core import Geometry
from raycasimir.piston import (
    epstein_z2,
    epstein_z2_direct,
    piston_energy,
    piston_even_energy,
    piston_even_force,
    piston_force,
    piston_odd_energy,
    piston_odd_force,
)


def test_z2_unit_square_identity():
    beta = mpmath.nsum(lambda k: (-1) ** k / (2 * k + 1) ** 1.5, [0, mpmath.inf])
    exact = float(mpmath.zeta(1.5) * beta - mpmath.zeta(3))
    assert epstein_z2(1, 1) == pytest.approx(exact, abs=1e-12)
    assert exact == pytest.approx(1.0563485176, abs=1e-9)


@pytest.mark.parametrize("a,b", [(1, 2), (0.3, 1.7), (2.5, 0.4)])
def test_z2_against_direct_sum(a, b):
    assert epstein_z2(a, b) == pytest.approx(epstein_z2_direct(a, b), rel=1e-9)
    assert epstein_z2(a, b) == epstein_z2(b, a)


def test_z2_generic_power():
    direct = float(mpmath.nsum(lambda n, m: ((n * 0.7) ** 2 + (m * 1.1) ** 2) ** -2, [1, mpmath.inf], [1, mpmath.inf]))
    assert epstein_z2(0.7, 1.1, 4.0) == pytest.approx(direct, rel=1e-9)
    with pytest.raises(ValueError):
        epstein_z2(1, 1, 2.0)


def test_piston_values():
    assert piston_odd_energy(1, 1) == pytest.approx(-math.pi / 24)
    assert piston_even_energy(1, 1) == pytest.approx(-1.0563485176 / (8 * math.pi), rel=1e-9)


@pytest.mark.parametrize("a,s", [(1, 1), (0.5, 2), (3, 1)])
def test_piston_forces_are_derivatives(a, s):
    da = 1e-5
    fd_even = -(piston_even_energy(a + da, s) - piston_even_energy(a - da, s)) / (2 * da)
    fd_odd = -(piston_odd_energy(a + da, s) - piston_odd_energy(a - da, s)) / (2 * da)
    assert piston_even_force(a, s) == pytest.approx(fd_even, rel=1e-7)
    assert piston_odd_force(a, s) == pytest.approx(fd_odd, rel=1e-7)


def test_breakdowns_ignore_h():
    g = Geometry(1.0, 1.0, 0.5)
    assert piston_energy(g).odd_paths == piston_odd_energy(1, 1)
    assert piston_force(g).geometry.h == 0.0
