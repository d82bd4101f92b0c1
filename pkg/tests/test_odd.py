import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from raycasimir.core import Geometry
from raycasimir.lattice import is_allowed
from raycasimir.odd import (
    OddFamily,
    Orientation,
    circle_gaps,
    energy12,
    energy21,
    families_energy,
    families_of_order,
    family_energy,
    measure_x,
    measure_x_sorted,
    measure_y,
    odd_energy,
    odd_energy_analytic3,
    odd_energy_numeric,
    odd_series,
)
from raycasimir.piston import piston_odd_energy
from raycasimir.quadrature import CubatureSettings


def test_family_enumeration():
    assert families_of_order(1) == [] and families_of_order(4) == []
    for r in (3, 5, 7, 9):
        fams = families_of_order(r)
        assert len(fams) == r - 1
        assert all(f.order == r for f in fams)
        assert len({f.offsets for f in fams}) == r - 1
    assert OddFamily(Orientation.Y, 1, 1).offsets == (2, 1)
    assert OddFamily(Orientation.X, 1, 1).offsets == (1, 2)


def test_three_reflection_values_at_h0():
    g = Geometry(1.0, 1.0, 0.0)
    assert energy21(g) == pytest.approx(-1 / (32 * math.pi * math.sqrt(2)))
    assert energy12(g) == pytest.approx(-1 / (32 * math.pi * math.sqrt(2)))
    assert odd_energy_analytic3(g) == pytest.approx(-0.056270, abs=1e-6)


def test_closed_forms_limits():
    assert abs(energy21(Geometry(1, 1, 200.0))) < 1e-6
    vals = [energy12(Geometry(1, 1, h)) for h in (0, 0.1, 0.5, 2)]
    assert all(np.diff(vals) > 0)
    assert energy12(Geometry(1e-6, 1, 0.3)) / 1e-6 == pytest.approx(energy12(Geometry(2e-6, 1, 0.3)) / 2e-6, rel=1e-5)


def test_energy21_h_log_h():
    g0 = energy21(Geometry(1, 1, 0))
    hs = np.logspace(-6, -3, 7)
    d = np.array([energy21(Geometry(1, 1, h)) - g0 for h in hs])
    # d = c1 h log h + c2 h + O(h^2 log h); at a = 1, c1 = -1/(16 pi)
    coef = np.linalg.lstsq(np.column_stack([hs * np.log(hs), hs, hs**2 * np.log(hs)]), d, rcond=None)[0]
    assert coef[0] == pytest.approx(-1 / (16 * math.pi), rel=1e-3)


@pytest.mark.parametrize("a,s,h", [(1, 1, 0.1), (0.5, 2, 0.25), (2, 0.5, 1.0), (1, 1, 1e-5)])
def test_exact_engine_reproduces_closed_forms(a, s, h):
    g = Geometry(a, s, h)
    assert family_energy(g, OddFamily(Orientation.Y, 1, 1))[0] / 4 == pytest.approx(energy21(g), rel=1e-10)
    assert family_energy(g, OddFamily(Orientation.X, 1, 1))[0] / 4 == pytest.approx(energy12(g), rel=1e-10)


@pytest.mark.parametrize("n,M", [(1, 1), (2, 1), (2, 2), (3, 1), (1, 3)])
def test_measure_y_matches_sampling(n, M, rng):
    g = Geometry(1.0, 1.0, 0.13)
    L = g.period
    for y0 in rng.uniform(0, L, 3):
        tau = (M * L - y0) / n
        x0 = rng.uniform(0, g.a, 100_000)
        frac = is_allowed(g, (x0, np.full_like(x0, y0)), (2 * n, 2 * M - 1)).mean()
        expected = measure_y(tau, n, L, g.h)[0] / tau
        sigma = math.sqrt(max(expected * (1 - expected), 1e-5) / len(x0))
        assert abs(frac - expected) < 3 * sigma + 1e-12


@pytest.mark.parametrize("npr,m", [(1, 1), (2, 1), (3, 1), (2, 2)])
def test_measure_x_matches_sampling(npr, m, rng):
    g = Geometry(1.0, 1.0, 0.13)
    L = g.period
    for x0 in rng.uniform(0, g.a, 3):
        tau = g.a * m * L / (npr * g.a - x0)
        y0 = rng.uniform(0, L, 100_000)
        frac = is_allowed(g, (np.full_like(y0, x0), y0), (2 * npr - 1, 2 * m)).mean()
        expected = measure_x(tau, npr, L, g.h)[0] / L
        sigma = math.sqrt(max(expected * (1 - expected), 1e-5) / len(y0))
        assert abs(frac - expected) < 3 * sigma + 1e-12


@settings(max_examples=60, deadline=None)
@given(st.floats(0, 1, exclude_max=True), st.integers(0, 300))
def test_three_gap_matches_sorting(alpha, N):
    lengths, counts = circle_gaps(np.array([alpha]), N)
    pts = np.sort(np.mod(alpha * np.arange(N + 1), 1.0))
    gaps = np.diff(pts, append=pts[0] + 1)
    assert counts.sum() == N + 1 and (counts >= 0).all()
    for cut in (0.0, 0.01, 0.2):
        ref = np.maximum(gaps - cut, 0).sum()
        assert (counts[:, 0] * np.maximum(lengths[:, 0] - cut, 0)).sum() == pytest.approx(ref, abs=1e-12 * (N + 1))


def test_measure_x_sorted_agrees(rng):
    tau = rng.uniform(0.1, 5, 200)
    for npr in (2, 5, 17):
        assert np.allclose(measure_x(tau, npr, 1.3, 0.05), measure_x_sorted(tau, npr, 1.3, 0.05), atol=1e-12)


@pytest.mark.parametrize("h", [0.0, 0.05, 0.3])
def test_family_force_is_derivative(h):
    g = Geometry(1.0, 1.0, h)
    fams = families_of_order(7)
    da = 1e-5
    e_hi, _ = families_energy(g.with_a(1 + da), fams)
    e_lo, _ = families_energy(g.with_a(1 - da), fams)
    _, f = families_energy(g, fams)
    assert np.allclose(f, -(e_hi - e_lo) / (2 * da), rtol=1e-6, atol=1e-12)


def test_piston_limit():
    res = odd_energy(Geometry(1.0, 1.0, 0.0), tol=1e-5)
    assert res.report.converged
    assert res.energy_error < 1e-5 * abs(res.energy)
    assert res.energy == pytest.approx(piston_odd_energy(1, 1), rel=1e-5)
    assert res.force == pytest.approx(-math.pi / 48, rel=1e-5)


def test_small_h_is_stable():
    # r = 5 stays finite and continuous as h -> 0
    e0 = odd_energy_numeric(Geometry(1, 1, 0.0), 5)[0]
    e1 = odd_energy_numeric(Geometry(1, 1, 1e-6), 5)[0]
    assert math.isfinite(e1)
    assert abs(e1 - e0) < 1e-4 * abs(e0)


def test_x_and_y_families_swap_with_sides():
    # at h = 0 swapping a and s exchanges the two orientations
    g, gt = Geometry(0.7, 1.9, 0.0), Geometry(1.9, 0.7, 0.0)
    for n, m in [(1, 1), (2, 1), (1, 3)]:
        ey = family_energy(g, OddFamily(Orientation.Y, n, m))[0]
        ex = family_energy(gt, OddFamily(Orientation.X, m, n))[0]
        assert ey == pytest.approx(ex, rel=1e-12)


def test_series_report_and_numeric_breakdown():
    g = Geometry(1.0, 1.0, 0.2)
    res = odd_series(g, 21, keep_families=True)
    assert res.report.orders == list(range(3, 22, 2))
    assert len(res.families) == sum(r - 1 for r in range(3, 22, 2))
    total, fams = odd_energy_numeric(g, 21)
    assert total == pytest.approx(res.report.partial[-1], rel=1e-12)
    with pytest.raises(ValueError):
        odd_energy_numeric(g, 5, method="nope")


@settings(max_examples=10, deadline=None)
@given(st.floats(0.3, 3), st.floats(0.3, 3), st.floats(0, 1), st.sampled_from([0.5, 2.0, 10.0]))
def test_energy_scales_inversely(a, s, h, lam):
    g = Geometry(a, s, h)
    e1 = odd_energy_numeric(g, 9)[0]
    e2 = odd_energy_numeric(g.scaled(lam), 9)[0]
    assert e2 == pytest.approx(e1 / lam, rel=1e-9)


@pytest.mark.parametrize("a,s,h", [(1, 1, 0.1), (2, 0.5, 0.25)])
def test_cubature_oracle_on_three_reflection_families(a, s, h):
    g = Geometry(a, s, h)
    total, fams = odd_energy_numeric(g, 3, method="cubature", settings=CubatureSettings(rel_tol=1e-5))
    assert len(fams) == 2
    assert total == pytest.approx(odd_energy_analytic3(g), rel=1e-4)
