"""Limit sweeps: high push rates, vanishing discount, operator residuals."""

import json
import math
import warnings

import numpy as np
import pytest

from diffctrl.asymptotics import (
    feller_approx_report,
    functional_limit_report,
    sweep_discount,
    sweep_lambda,
)
from diffctrl.errors import PreconditionError

LAMBDAS = (1.0, 10.0, 100.0, 1000.0)
RATES = (1.0, 0.1, 0.01, 0.001)


def test_bm_lambda_gap_closed_form(bm_spec):
    # the gap to the singular threshold is exactly 1/|alpha^-(r+lam)|
    mu, sg, r = 0.1, 1.0, 0.001
    grid = (0.5, 1.0, 5.0, 20.0)
    sw = sweep_lambda(bm_spec, grid=grid, r=r)
    for row in sw.rows:
        pred = 1.0 / (math.sqrt(mu * mu + 2.0 * (r + row.param) * sg * sg) - mu)
        assert row.threshold_gap == pytest.approx(pred, abs=1e-8)


def test_ou_lambda_sweep_discounted(ou_spec):
    sw = sweep_lambda(ou_spec, grid=LAMBDAS, r=1.0)
    gaps = sw.threshold_gaps
    assert all(b < a for a, b in zip(gaps, gaps[1:]))
    # approach at rate 1/sqrt(2 lam): the final gap sits on the prediction
    assert abs(gaps[-1] - 1.0 / math.sqrt(2.0 * 1001.0)) < 2e-3
    vgaps = sw.value_gaps
    assert all(b < a for a, b in zip(vgaps, vgaps[1:]))
    assert sw.diagnostics["threshold_monotone"] is True
    assert sw.diagnostics["warnings"] == []


def test_ou_lambda_sweep_ergodic(ou_spec):
    sw = sweep_lambda(ou_spec, grid=LAMBDAS, r=0.0)
    assert sw.problem == "constrained-ergodic"
    gaps = sw.threshold_gaps
    assert all(b < a for a, b in zip(gaps, gaps[1:]))
    assert abs(gaps[-1] - 1.0 / math.sqrt(2.0 * 1000.0)) < 2e-3
    # the average cost converges much faster than the threshold
    assert sw.value_gaps[-1] < 1e-3
    est = sw.diagnostics["order_estimate"]
    assert est == pytest.approx(0.5, abs=0.1)


def test_ou_discount_sweep_singular(ou_spec):
    sw = sweep_discount(ou_spec, grid=RATES)
    gaps = sw.threshold_gaps
    assert all(b < a for a, b in zip(gaps, gaps[1:]))
    assert gaps[-1] < 5e-3
    # r V(x0) approaches the ergodic level beta
    vgaps = sw.value_gaps
    assert all(b < a for a, b in zip(vgaps, vgaps[1:]))
    assert vgaps[-1] < 1e-2
    assert sw.targets["value"] == pytest.approx(0.4817112350201283, rel=1e-9)


def test_ou_discount_sweep_constrained(ou_spec):
    sw = sweep_discount(ou_spec, grid=RATES, lam=20.0)
    assert sw.problem == "constrained-discounted"
    gaps = sw.threshold_gaps
    assert all(b < a for a, b in zip(gaps, gaps[1:]))
    assert gaps[-1] < 5e-3


def test_transient_model_rejected_on_discount_axis(bm_spec):
    with pytest.raises(PreconditionError):
        sweep_discount(bm_spec, grid=RATES)


def test_grid_validation(ou_spec):
    with pytest.raises(PreconditionError):
        sweep_lambda(ou_spec, grid=(1.0, 2.0, 3.0))  # too short
    with pytest.raises(PreconditionError):
        sweep_lambda(ou_spec, grid=(1.0, 3.0, 2.0, 4.0))  # not increasing
    with pytest.raises(PreconditionError):
        sweep_lambda(ou_spec, grid=(-1.0, 1.0, 2.0, 4.0))  # nonpositive
    with pytest.raises(PreconditionError):
        sweep_lambda(ou_spec, grid=LAMBDAS, r=-0.5)
    with pytest.raises(PreconditionError):
        sweep_discount(ou_spec, grid=(0.001, 0.01, 0.1, 1.0))  # wrong direction
    with pytest.raises(PreconditionError):
        sweep_discount(ou_spec, grid=RATES, lam=0.0)


def test_sweep_serialization(bm_spec):
    sw = sweep_lambda(bm_spec, grid=(0.5, 1.0, 5.0, 20.0), r=0.001)
    csv = sw.to_csv()
    lines = csv.strip().split("\n")
    assert len(lines) == 5
    assert lines[0].startswith("axis,")
    d = json.loads(sw.to_json())
    assert d["axis"] == "lambda"
    assert len(d["rows"]) == 4
    assert d["rows"][0]["param"] == 0.5
    assert "order_estimate" in d["diagnostics"]


def test_functional_limits_lambda_axis(ou_spec):
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        rep = functional_limit_report(ou_spec, (-0.5, 0.5), (10.0, 100.0), axis="lambda")
    assert rep.non_monotone == ()
    for x in (-0.5, 0.5):
        for which in ("K", "L"):
            seq = rep.gaps(x, which)
            assert all(b < a for a, b in zip(seq, seq[1:]))
    assert rep.to_csv().count("\n") == len(rep.rows) + 1


def test_functional_limits_discount_axis(ou_spec):
    rep = functional_limit_report(ou_spec, (-0.5, 0.5), (1.0, 0.1), axis="discount")
    assert rep.non_monotone == ()
    # targets are the zero-rate speed-measure functionals, nonzero here
    assert all(row.k_target != 0.0 for row in rep.rows)


def test_functional_limit_validation(ou_spec, bm_spec):
    with pytest.raises(PreconditionError):
        functional_limit_report(ou_spec, (0.0,), (10.0, 100.0), axis="sideways")
    with pytest.raises(PreconditionError):
        functional_limit_report(ou_spec, (), (10.0, 100.0))
    with pytest.raises(PreconditionError):
        functional_limit_report(bm_spec, (0.0,), (1.0, 0.1), axis="discount")


def test_feller_report_decreasing(ou_spec):
    rep = feller_approx_report(ou_spec, (10.0, 100.0, 1000.0), (-1.0, 0.3, 1.2))
    residuals = [row.sup_residual for row in rep.rows]
    assert all(b < a for a, b in zip(residuals, residuals[1:]))
    assert rep.decreasing
    # resolvent residual decays like 1/lam
    assert rep.order_estimate == pytest.approx(1.0, abs=0.1)
    assert rep.to_csv().splitlines()[0] == "lam,sup_residual,worst_x"
