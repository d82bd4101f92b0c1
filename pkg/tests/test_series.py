import numpy as np
import pytest

from raycasimir.series import ConvergenceReport, Termination, extrapolate_tail, fit_log_slope, limit_estimate


def test_extrapolation_recovers_model_limit():
    r = np.arange(3, 200, 2)
    sums = 1.5 - 0.7 / r + 0.2 / r**2
    assert extrapolate_tail(r, sums, 50, 200) == pytest.approx(1.5, abs=1e-12)
    value, err = limit_estimate(r, sums)
    assert value == pytest.approx(1.5, abs=1e-12) and err < 1e-10


def test_slope_fit():
    r = np.arange(1, 100)
    assert fit_log_slope(r, 3.0 * r**-2.0) == pytest.approx(-2.0)
    with pytest.raises(ValueError):
        fit_log_slope([1, 2], [1, 1])


def test_report_fields():
    r = list(range(1, 65))
    partial = [1 - 1 / k for k in r[1:]]
    rep = ConvergenceReport("x", r[1:], partial, 1.0, 1e-9, Termination.TOLERANCE)
    assert rep.converged and rep.max_order == 64
    assert len(rep.successive_rel_diffs) == len(partial) - 1
    assert rep.summary()["terminated_by"] == "tolerance"
