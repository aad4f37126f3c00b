"""Model coefficient classes and their fundamental solutions."""

import math

import numpy as np
import pytest

from diffctrl.errors import ConfigError
from diffctrl.models import BrownianMotion, GenericDiffusion, OrnsteinUhlenbeck


def test_bm_coefficients():
    bm = BrownianMotion(mu=0.3, sigma=2.0)
    xs = np.array([-1.0, 0.0, 5.0])
    assert np.all(bm.drift(xs) == 0.3)
    assert np.all(bm.sigma(xs) == 2.0)
    assert bm.lower == -math.inf


def test_bm_exponents_solve_characteristic_equation():
    bm = BrownianMotion(mu=0.1, sigma=1.3)
    s = 0.7
    for a in bm.alpha(s):
        # (sigma^2/2) a^2 + mu a - s = 0
        assert 0.5 * bm.sigma0**2 * a * a + bm.mu * a - s == pytest.approx(0.0, abs=1e-12)
    a_plus, a_minus = bm.alpha(s)
    assert a_plus > 0 > a_minus


def test_bm_recurrence_flag():
    assert BrownianMotion(mu=0.0).recurrent is True
    assert BrownianMotion(mu=0.01).recurrent is False


def test_ou_coefficients():
    ou = OrnsteinUhlenbeck(kappa=2.0, sigma=0.5)
    assert ou.drift(1.5) == pytest.approx(-3.0)
    assert np.all(ou.sigma(np.zeros(3)) == 0.5)
    assert ou.recurrent is True


def test_sigma_must_be_positive():
    with pytest.raises(ConfigError):
        BrownianMotion(sigma=0.0)
    with pytest.raises(ConfigError):
        OrnsteinUhlenbeck(sigma=-1.0)
    with pytest.raises(ConfigError):
        OrnsteinUhlenbeck(kappa=0.0)


def test_speed_scale_consistency():
    # m'(x) = 2 / (sigma^2 S'(x)) for every model
    for model in (BrownianMotion(mu=0.2), OrnsteinUhlenbeck(kappa=1.0, sigma=1.4)):
        xs = np.linspace(-2, 2, 9)
        lhs = model.log_speed_density(xs)
        rhs = math.log(2.0) - 2 * np.log(model.sigma(xs)) - model.log_scale_density(xs)
        assert np.allclose(lhs, rhs, atol=1e-14)


def test_fundamental_pair_requires_positive_rate():
    bm = BrownianMotion()
    with pytest.raises(ConfigError):
        bm.fundamental_pair(0.0)
    with pytest.raises(ConfigError):
        bm.fundamental_pair(-1.0)


def test_fundamental_pair_cached():
    ou = OrnsteinUhlenbeck()
    assert ou.fundamental_pair(1.0) is ou.fundamental_pair(1.0)


def test_describe_round_trip():
    bm = BrownianMotion(mu=0.1, sigma=2.0)
    d = bm.describe()
    assert d["kind"] == "bm" and d["mu"] == 0.1 and d["sigma"] == 2.0
    ou = OrnsteinUhlenbeck(kappa=3.0)
    d2 = ou.describe()
    assert d2["kind"] == "ou" and d2["kappa"] == 3.0


def test_generic_diffusion_from_callables():
    gen = GenericDiffusion(
        drift=lambda x: -2.0 * np.asarray(x, dtype=float),
        sigma=lambda x: np.ones_like(np.asarray(x, dtype=float)),
        working_interval=(-10, 10),
    )
    assert gen.drift(0.5) == pytest.approx(-1.0)
    assert gen.sigma(3.0) == pytest.approx(1.0)
    assert gen.describe()["working_interval"] == [-10.0, 10.0]


def test_generic_diffusion_rejects_vanishing_sigma():
    with pytest.raises(ConfigError):
        GenericDiffusion(
            drift=lambda x: 0.0 * np.asarray(x, dtype=float),
            sigma=lambda x: np.asarray(x, dtype=float),
            working_interval=(-5, 5),
        )


def test_generic_diffusion_rejects_nonfinite_drift():
    with pytest.raises(ConfigError):
        GenericDiffusion(
            drift=lambda x: 1.0 / np.asarray(x, dtype=float),
            sigma=lambda x: np.ones_like(np.asarray(x, dtype=float)),
            working_interval=(-5, 5),
        )


def test_generic_diffusion_interval_validation():
    ok = lambda x: np.ones_like(np.asarray(x, dtype=float))
    with pytest.raises(ConfigError):
        GenericDiffusion(drift=ok, sigma=ok, working_interval=(3, 3))
    with pytest.raises(ConfigError):
        GenericDiffusion(drift=ok, sigma=ok, lower=0.0, working_interval=(-1, 5))
