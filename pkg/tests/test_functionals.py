"""Resolvents and one-sided functionals against closed forms and identities."""

import math

import numpy as np
import pytest

from diffctrl.functionals import (
    feller_gap,
    functional_H,
    functional_K,
    functional_L,
    mass_identity_residuals,
    resolvent,
    resolvent_identity_residuals,
    resolvent_with_derivatives,
    speed_mass,
)
from diffctrl.models import BrownianMotion, OrnsteinUhlenbeck
from diffctrl.problems import make_cost

QUAD = lambda y: np.asarray(y, dtype=float) ** 2
ABS = lambda y: np.abs(np.asarray(y, dtype=float))


def test_resolvent_of_constant():
    const = lambda y: np.full_like(np.asarray(y, dtype=float), 3.2)
    for model in (BrownianMotion(mu=0.1), OrnsteinUhlenbeck()):
        for s in (0.3, 1.0, 7.0):
            got = resolvent(model, s, const, 0.4)
            assert got == pytest.approx(3.2 / s, rel=1e-9)


def test_bm_resolvent_quadratic_closed_form():
    # particular solution of (sigma^2/2) u'' + mu u' - r u = -x^2
    mu, sg, r = 0.1, 1.0, 0.5
    bm = BrownianMotion(mu=mu, sigma=sg)
    for x in (-1.5, 0.0, 2.0):
        u = x * x / r + 2 * mu * x / r**2 + sg**2 / r**2 + 2 * mu**2 / r**3
        du = 2 * x / r + 2 * mu / r**2
        d2u = 2 / r
        r0, r1, r2 = resolvent_with_derivatives(bm, r, QUAD, x)
        assert r0 == pytest.approx(u, rel=1e-9)
        assert r1 == pytest.approx(du, rel=1e-8, abs=1e-8)
        assert r2 == pytest.approx(d2u, rel=1e-8)


def test_ou_resolvent_quadratic_closed_form():
    kappa, sg, r = 1.0, 1.0, 0.7
    ou = OrnsteinUhlenbeck(kappa=kappa, sigma=sg)
    a = 1.0 / (r + 2 * kappa)
    c = sg**2 / (r * (r + 2 * kappa))
    for x in (-0.7, 0.3, 1.9):
        r0, r1, r2 = resolvent_with_derivatives(ou, r, QUAD, x)
        assert r0 == pytest.approx(a * x * x + c, rel=1e-9)
        assert r1 == pytest.approx(2 * a * x, rel=1e-8, abs=1e-9)
        assert r2 == pytest.approx(2 * a, rel=1e-8)


def test_representations_agree():
    ou = OrnsteinUhlenbeck()
    for s in (1.0, 21.0):
        for x in (-0.8, 0.35, 1.4):
            for fn in (functional_K, functional_L):
                vals = [
                    fn(ou, s, ABS, x, representation=rep, kinks=(0.0,))
                    for rep in ("centered", "integral", "derivative")
                ]
                spread = max(vals) - min(vals)
                assert spread <= 1e-6 * max(1.0, abs(vals[0]))


def test_functionals_of_constant_vanish():
    const = lambda y: np.full_like(np.asarray(y, dtype=float), 2.5)
    ou = OrnsteinUhlenbeck()
    for rep in ("centered", "integral", "derivative"):
        assert functional_K(ou, 1.0, const, 0.6, representation=rep) == pytest.approx(
            0.0, abs=1e-8
        )
        assert functional_L(ou, 1.0, const, 0.6, representation=rep) == pytest.approx(
            0.0, abs=1e-8
        )
    assert functional_H(ou, const, 0.6, side="lower") == pytest.approx(0.0, abs=1e-12)
    assert functional_H(ou, const, 0.6, side="upper") == pytest.approx(0.0, abs=1e-12)


def test_mass_identities():
    for model in (BrownianMotion(mu=0.3, sigma=1.1), OrnsteinUhlenbeck(kappa=2.0)):
        for s in (0.5, 5.0):
            for x in (-1.0, 0.2, 1.7):
                res = mass_identity_residuals(model, s, x)
                assert res["lower"] < 1e-7
                assert res["upper"] < 1e-7


def test_speed_mass_ou_closed_form():
    # m'(z) = (2/sigma^2) exp(-kappa z^2 / sigma^2) integrates to
    # 2 sqrt(pi / kappa) / sigma over the whole line
    for kappa, sg in ((1.0, 1.0), (2.0, 1.3)):
        ou = OrnsteinUhlenbeck(kappa=kappa, sigma=sg)
        want = 2.0 * math.sqrt(math.pi / kappa) / sg
        assert speed_mass(ou) == pytest.approx(want, rel=1e-9)


def test_speed_mass_partial_range():
    ou = OrnsteinUhlenbeck()
    total = speed_mass(ou)
    left = speed_mass(ou, b=0.4)
    right = speed_mass(ou, a=0.4)
    assert left + right == pytest.approx(total, rel=1e-9)
    assert speed_mass(ou, a=1.0, b=1.0) == 0.0


def test_resolvent_identities():
    cases = [
        (BrownianMotion(mu=0.1), make_cost("quadratic"), 0.001, ()),
        (OrnsteinUhlenbeck(), make_cost("absolute"), 0.1, (0.0,)),
    ]
    for model, cost, gamma, kinks in cases:
        for r in (1.0, 0.25):
            for x in (-0.9, 0.5):
                res = resolvent_identity_residuals(
                    model, r, 20.0, cost, gamma, x, kinks=kinks
                )
                assert res["yield_identity"] < 1e-7
                assert res["drift_identity"] < 1e-7
                assert res["resolvent_ode"] < 1e-5


def test_feller_gap_decreases():
    ou = OrnsteinUhlenbeck()
    xs = (-1.0, 0.3, 1.2)
    gaps = [feller_gap(ou, 1.0, lam, ABS, xs, kinks=(0.0,)) for lam in (10, 100, 1000)]
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[2] < 1e-2


def test_normalization_invariance():
    ou = OrnsteinUhlenbeck()
    s, x = 1.0, 0.5
    pair = ou.fundamental_pair(s)
    scaled = pair.rescaled(2.0, 5.0)
    for fn in (functional_K, functional_L):
        a = fn(ou, s, ABS, x, kinks=(0.0,), pair=pair)
        b = fn(ou, s, ABS, x, kinks=(0.0,), pair=scaled)
        assert b == pytest.approx(a, rel=1e-12)
    a = resolvent(ou, s, ABS, x, kinks=(0.0,), pair=pair)
    b = resolvent(ou, s, ABS, x, kinks=(0.0,), pair=scaled)
    assert b == pytest.approx(a, rel=1e-12)


def test_resolvent_leg_sides_validated():
    from diffctrl.functionals import resolvent_leg

    bm = BrownianMotion(mu=0.1)
    with pytest.raises(ValueError):
        resolvent_leg(bm, 1.0, None, 0.0, side="middle")
    lo = resolvent_leg(bm, 1.0, None, 0.0, side="lower")
    hi = resolvent_leg(bm, 1.0, None, 0.0, side="upper")
    assert lo > 0 and hi > 0
