"""Threshold solvers against closed forms and frozen high-precision roots."""

import math

import numpy as np
import pytest

from diffctrl.errors import PreconditionError
from diffctrl.models import BrownianMotion, OrnsteinUhlenbeck
from diffctrl.problems import ProblemSpec, make_cost
from diffctrl.solvers import (
    solve_constrained_discounted,
    solve_constrained_ergodic,
    solve_singular_discounted,
    solve_singular_ergodic,
)

from _oracles import OU_ROOTS


def bm_alpha(mu: float, sigma: float, s: float) -> tuple[float, float]:
    # roots of (sigma^2/2) a^2 + mu a = s, scaled so the closed-form
    # thresholds below read cleanly
    d = math.sqrt(mu * mu + 2.0 * s * sigma * sigma)
    return mu + d, mu - d


def test_bm_singular_discounted_closed_form(bm_spec):
    mu, sg = 0.1, 1.0
    gamma, r = 0.001, 0.001
    a_plus, _ = bm_alpha(mu, sg, r)
    want = r * gamma / 2.0 + 1.0 / a_plus
    sol = solve_singular_discounted(bm_spec, r)
    assert sol.threshold == pytest.approx(want, rel=1e-10)
    assert sol.problem == "singular-discounted"
    assert sol.root_residual < 1e-9


@pytest.mark.parametrize("lam", [0.5, 1.0, 5.0, 20.0, 100.0])
def test_bm_constrained_discounted_closed_form(bm_spec, lam):
    mu, sg = 0.1, 1.0
    gamma, r = 0.001, 0.001
    a_plus, _ = bm_alpha(mu, sg, r)
    _, a_minus = bm_alpha(mu, sg, r + lam)
    want = r * gamma / 2.0 + 1.0 / a_plus + 1.0 / a_minus
    sol = solve_constrained_discounted(bm_spec, r, lam)
    assert sol.threshold == pytest.approx(want, rel=1e-9)
    assert sol.lam == lam


@pytest.mark.parametrize("r", [1.0, 0.1, 0.01, 0.001])
def test_ou_singular_discounted_roots(ou_spec, r):
    sol = solve_singular_discounted(ou_spec, r)
    assert sol.threshold == pytest.approx(OU_ROOTS[f"singular_discounted_r{r:g}"], rel=1e-10)


@pytest.mark.parametrize("lam", [1, 10, 20, 100, 1000])
def test_ou_constrained_discounted_roots(ou_spec, lam):
    sol = solve_constrained_discounted(ou_spec, 1.0, float(lam))
    want = OU_ROOTS[f"constrained_discounted_r1_lam{lam}"]
    assert sol.threshold == pytest.approx(want, rel=1e-10)


def test_ou_singular_ergodic_root_and_level(ou_spec):
    sol = solve_singular_ergodic(ou_spec)
    assert sol.threshold == pytest.approx(OU_ROOTS["singular_ergodic_threshold"], rel=1e-10)
    assert sol.beta == pytest.approx(OU_ROOTS["singular_ergodic_beta"], rel=1e-10)
    assert sol.r is None


def test_ou_constrained_ergodic_root_and_level(ou_spec):
    sol = solve_constrained_ergodic(ou_spec, 20.0)
    assert sol.threshold == pytest.approx(
        OU_ROOTS["constrained_ergodic_lam20_threshold"], rel=1e-10
    )
    assert sol.beta == pytest.approx(OU_ROOTS["constrained_ergodic_lam20_beta"], rel=1e-10)
    assert sol.beta_alt == pytest.approx(sol.beta, rel=1e-6)


def test_thresholds_invariant_under_pair_rescaling(ou_spec):
    # replace every cached fundamental pair with a rescaled copy; all
    # downstream quantities use ratio form, so nothing may move
    def rescale_all(model):
        for s in list(model._pairs):
            model._pairs[s] = model._pairs[s].rescaled(7.3, 0.02)

    base = [
        solve_singular_discounted(ou_spec, 1.0).threshold,
        solve_constrained_discounted(ou_spec, 1.0, 20.0).threshold,
        solve_singular_ergodic(ou_spec).threshold,
        solve_constrained_ergodic(ou_spec, 20.0).threshold,
    ]
    rescale_all(ou_spec.model)
    again = [
        solve_singular_discounted(ou_spec, 1.0).threshold,
        solve_constrained_discounted(ou_spec, 1.0, 20.0).threshold,
        solve_singular_ergodic(ou_spec).threshold,
        solve_constrained_ergodic(ou_spec, 20.0).threshold,
    ]
    for a, b in zip(base, again):
        assert abs(a - b) <= 1e-10 * max(1.0, abs(a))


def test_value_function_continuity_and_smooth_fit(ou_spec):
    sol = solve_singular_discounted(ou_spec, 1.0)
    y = sol.threshold
    eps = 1e-7
    below = sol.value_at(y - eps)
    above = sol.value_at(y + eps)
    assert above == pytest.approx(below, rel=1e-6)
    # above the barrier the value grows linearly at the marginal push cost
    h = 1e-6
    slope = (sol.value_at(y + 2 * h) - sol.value_at(y + h)) / h
    assert slope == pytest.approx(ou_spec.gamma, rel=1e-6)
    assert sol.continuity_gap < 1e-9
    assert sol.smooth_fit_gap < 1e-8


def test_constrained_value_continuity(ou_spec):
    sol = solve_constrained_discounted(ou_spec, 1.0, 20.0)
    y = sol.threshold
    eps = 1e-7
    assert sol.value_at(y + eps) == pytest.approx(sol.value_at(y - eps), rel=1e-6)
    assert sol.continuity_gap < 1e-9


def test_reported_gaps_small_all_problems(ou_spec):
    sols = [
        solve_singular_discounted(ou_spec, 1.0),
        solve_constrained_discounted(ou_spec, 1.0, 20.0),
        solve_singular_ergodic(ou_spec),
        solve_constrained_ergodic(ou_spec, 20.0),
    ]
    for sol in sols:
        assert sol.root_residual < 1e-9
        assert sol.continuity_gap < 1e-8
        assert sol.smooth_fit_gap < 1e-7
        lo, hi = sol.bracket
        assert lo < sol.threshold < hi


def test_to_dict_schema(ou_spec):
    sol = solve_constrained_discounted(ou_spec, 1.0, 20.0)
    d = sol.to_dict(grid=[0.0, 0.5])
    for key in (
        "schema_version",
        "problem",
        "threshold",
        "gamma",
        "r",
        "lam",
        "beta",
        "beta_alt",
        "x_star",
        "root_residual",
        "bracket",
        "continuity_gap",
        "smooth_fit_gap",
        "spec",
        "diagnostics",
        "audit",
    ):
        assert key in d
    assert d["grid"] == [0.0, 0.5]
    assert d["values"][0] == pytest.approx(sol.value_at(0.0))
    assert d["audit"]["passed"] is True


def test_ill_posed_ergodic_raises():
    spec = ProblemSpec(BrownianMotion(mu=-0.3), make_cost("quadratic"), gamma=0.001)
    with pytest.raises(PreconditionError):
        solve_singular_ergodic(spec)


def test_fresh_specs_not_required():
    # independent spec objects reproduce the fixture results exactly
    spec = ProblemSpec(OrnsteinUhlenbeck(), make_cost("absolute"), gamma=0.1)
    sol = solve_singular_discounted(spec, 1.0)
    assert sol.threshold == pytest.approx(OU_ROOTS["singular_discounted_r1"], rel=1e-12)
