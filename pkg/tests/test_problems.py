"""Cost functions and problem specifications."""

import numpy as np
import pytest

from diffctrl.errors import ConfigError
from diffctrl.models import BrownianMotion, OrnsteinUhlenbeck
from diffctrl.problems import (
    CostFunction,
    ProblemSpec,
    cost_from_expression,
    make_cost,
)


def test_quadratic_cost():
    c = make_cost("quadratic")
    assert c(3.0) == pytest.approx(9.0)
    assert c.kinks == ()


def test_absolute_cost_has_kink():
    c = make_cost("absolute")
    assert c(-2.0) == pytest.approx(2.0)
    assert c.kinks == (0.0,)


def test_positive_part_cost():
    c = make_cost("positive_part")
    assert c(-1.0) == 0.0
    assert c(2.5) == pytest.approx(2.5)
    assert 0.0 in c.kinks


def test_power_cost():
    c = make_cost("power", p=4.0)
    assert c(2.0) == pytest.approx(16.0)
    assert c(-2.0) == pytest.approx(16.0)


def test_power_requires_valid_exponent():
    with pytest.raises(ConfigError):
        make_cost("power", p=0.0)


def test_unknown_kind_rejected():
    with pytest.raises(ConfigError):
        make_cost("cubic-ish")


def test_cost_from_expression():
    c = cost_from_expression("x^2 + abs(x)", kinks=(0.0,))
    assert c(-2.0) == pytest.approx(6.0)
    assert c.kinks == (0.0,)
    assert c.describe()["expr"] == "x^2 + abs(x)"


def test_cost_vectorized():
    c = make_cost("absolute")
    out = c(np.array([-1.0, 0.0, 2.0]))
    assert np.allclose(out, [1.0, 0.0, 2.0])


def test_cost_function_repr_and_describe():
    c = CostFunction(lambda x: np.asarray(x) * 0.0, "zero")
    assert "zero" in repr(c)
    assert c.describe()["name"] == "zero"


def test_spec_gamma_positive():
    with pytest.raises(ConfigError):
        ProblemSpec(BrownianMotion(), make_cost("quadratic"), gamma=0.0)


def test_theta_formula():
    # theta_r(x) = pi(x) + gamma (mu(x) - r x)
    spec = ProblemSpec(OrnsteinUhlenbeck(kappa=2.0), make_cost("quadratic"), gamma=0.5)
    f = spec.theta(0.3)
    x = 1.2
    want = x * x + 0.5 * (-2.0 * x - 0.3 * x)
    assert float(f(x)) == pytest.approx(want)


def test_theta_needs_positive_rate():
    spec = ProblemSpec(BrownianMotion(), make_cost("quadratic"), gamma=1.0)
    with pytest.raises(ConfigError):
        spec.theta(0.0)


def test_ergodic_yield_formula():
    spec = ProblemSpec(OrnsteinUhlenbeck(kappa=1.0), make_cost("absolute"), gamma=0.1)
    g = spec.pi_mu()
    x = -0.7
    assert float(g(x)) == pytest.approx(abs(x) + 0.1 * (-x) * 1.0)


def test_describe_nests_model_and_cost():
    spec = ProblemSpec(BrownianMotion(mu=0.1), make_cost("quadratic"), gamma=0.001)
    d = spec.describe()
    assert d["model"]["kind"] == "bm"
    assert d["cost"]["name"] == "quadratic"
    assert d["gamma"] == 0.001
