import math

import numpy as np
import pytest

from raycasimir.assembly import (
    SweepRecord,
    convergence_study,
    energy_breakdown,
    evaluate,
    fit_power,
    force_breakdown,
    interior_extrema,
    sweep_a,
    sweep_h,
)
from raycasimir.core import Geometry, pfa_force
from raycasimir.piston import piston_energy, piston_force


def test_interior_extrema_parabola():
    x = np.linspace(0, 1, 11)
    ext = interior_extrema(x, (x - 0.537) ** 2 + 1)
    assert len(ext) == 1 and ext[0].kind == "min"
    assert ext[0].x == pytest.approx(0.537, abs=1e-12)
    assert ext[0].value == pytest.approx(1.0, abs=1e-12)
    ext = interior_extrema(x, -np.abs(x - 0.3))
    assert [e.kind for e in ext] == ["max"]
    assert interior_extrema(x, x) == []
    assert interior_extrema(x, np.where(x == 0.5, np.nan, x * 0)) == []


def test_fit_power():
    x = np.array([1, 2, 4, 8.0])
    assert fit_power(x, -3 * x**-2.2) == pytest.approx(-2.2)


def test_h0_matches_piston():
    g = Geometry(1.0, 1.0, 0.0)
    e, pe = energy_breakdown(g, tol=1e-6), piston_energy(g)
    assert e.even == pytest.approx(pe.even, rel=1e-6)
    assert e.odd_paths == pytest.approx(pe.odd_paths, rel=1e-5)
    f, pf = force_breakdown(g, tol=1e-6), piston_force(g)
    assert f.total == pytest.approx(pf.total, rel=1e-6)


def test_evaluate_and_record():
    res = evaluate(Geometry(1.0, 1.0, 0.3), tol=1e-4, max_order=257)
    assert res.converged
    K, r = res.orders
    assert K >= 2 and r >= 3 and r % 2 == 1
    rec = SweepRecord.from_result(res)
    assert rec.F_total == pytest.approx(2 * rec.F_even)
    assert rec.F_neumann + rec.F_dirichlet == pytest.approx(rec.F_total)
    assert rec.F_total_over_Fpfa == pytest.approx(rec.F_total / (2 * pfa_force(res.geometry)))
    assert rec.orders == f"{K};{r}"


def test_failed_record():
    rec = SweepRecord.failed(Geometry(1, 1, 0.2))
    assert not rec.converged and math.isnan(rec.F_total) and rec.F_pfa < 0


def test_small_sweeps():
    res = sweep_h(1.0, 1.0, [0.3, 0.5, 0.7], tol=1e-3, max_order=65)
    assert [r.h for r in res.records] == [0.3, 0.5, 0.7]
    assert res.converged
    res_a = sweep_a(0.25, 1.0, [1.0, 2.0], tol=1e-3, max_order=65, normalize="piston")
    assert len(res_a.piston) == 2 and all(p < 0 for p in res_a.piston)
    with pytest.raises(ValueError):
        sweep_a(0.25, 1.0, [1.0], normalize="bogus")
    with pytest.raises(ValueError):
        sweep_h(1.0, 1.0, [])


def test_convergence_study_shapes():
    reps = convergence_study(Geometry(1, 1, 0.1), 21, even_shells=50)
    assert reps["odd"].orders[-1] == 21
    assert reps["even"].orders[-1] == 50
