"""Parabolic cylinder evaluation against frozen high-precision values.

The table in _oracles.py holds log D_nu(z) and its z-derivative computed
with mpmath at 30 digits over the order/argument ranges the solvers
actually hit (nu down to -1001, z in [-8, 8]).
"""

import math

import numpy as np
import pytest

from diffctrl.pcf import dlog_pcfd, log_pcfd, log_pcfd_pair

from _oracles import PCF_TABLE


def _scalar(fn, nu, z):
    return fn(nu, z).item()


@pytest.mark.parametrize("nu,z,logd,dlogd", PCF_TABLE, ids=lambda v: f"{v:g}" if isinstance(v, float) else str(v))
def test_log_value_and_derivative(nu, z, logd, dlogd):
    got = _scalar(log_pcfd, nu, z)
    dgot = _scalar(dlog_pcfd, nu, z)
    assert got == pytest.approx(logd, rel=2e-13, abs=2e-13)
    assert dgot == pytest.approx(dlogd, rel=2e-12, abs=2e-12)


def test_pair_holds_adjacent_orders():
    nu, z = -2.5, 1.3
    top, bot = log_pcfd_pair(nu, np.array([z]))
    assert top[0].item() == _scalar(log_pcfd, nu, z)
    assert bot[0].item() == _scalar(log_pcfd, nu - 1.0, z)


def test_vectorized_matches_scalar():
    zs = np.linspace(-6.0, 6.0, 25)
    lv = log_pcfd(-11.0, zs)
    dv = dlog_pcfd(-11.0, zs)
    assert lv.shape == zs.shape and dv.shape == zs.shape
    for z, a, b in zip(zs, lv, dv):
        assert a == _scalar(log_pcfd, -11.0, float(z))
        assert b == _scalar(dlog_pcfd, -11.0, float(z))


def test_gaussian_case():
    # D_0(z) = exp(-z^2/4) exactly
    for z in (-3.0, -0.4, 0.0, 1.7, 5.0):
        assert _scalar(log_pcfd, 0.0, z) == pytest.approx(-z * z / 4, abs=1e-14)
        assert _scalar(dlog_pcfd, 0.0, z) == pytest.approx(-z / 2, abs=1e-14)


def test_derivative_consistent_with_difference_quotient():
    nu, z, h = -7.3, 0.9, 1e-6
    fd = (_scalar(log_pcfd, nu, z + h) - _scalar(log_pcfd, nu, z - h)) / (2 * h)
    assert _scalar(dlog_pcfd, nu, z) == pytest.approx(fd, rel=1e-8)


def test_recurrence_identity():
    # D_nu'(z) + (z/2) D_nu(z) = nu D_{nu-1}(z), rewritten in logs
    nu, z = -4.5, 1.1
    log_d = _scalar(log_pcfd, nu, z)
    dlog_d = _scalar(dlog_pcfd, nu, z)
    log_dm1 = _scalar(log_pcfd, nu - 1.0, z)
    lhs = (dlog_d + z / 2) * math.exp(log_d)
    rhs = nu * math.exp(log_dm1)
    assert lhs == pytest.approx(rhs, rel=1e-11)


def test_monotone_decay_in_z_for_negative_order():
    # for nu < 0, D_nu is positive and decreasing on the real line
    zs = np.linspace(-5.0, 5.0, 41)
    lv, _ = log_pcfd_pair(-1.5, zs)
    assert np.all(np.diff(lv) < 0)
