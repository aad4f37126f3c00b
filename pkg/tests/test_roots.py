"""Bracketed root finding with automatic bracket expansion."""

import math

import pytest

from diffctrl.errors import NoRootError
from diffctrl.roots import solve_root


def test_simple_root():
    res = solve_root(lambda x: x * x - 2.0, seed=1.0)
    assert res.root == pytest.approx(math.sqrt(2.0), abs=1e-12)
    assert abs(res.residual) < 1e-10
    assert res.bracket[0] <= res.root <= res.bracket[1]


def test_root_far_from_seed():
    # bracket expansion has to walk a long way
    res = solve_root(lambda x: x - 300.0, seed=0.0)
    assert res.root == pytest.approx(300.0, abs=1e-9)


def test_exact_hit_on_bracket_edge():
    res = solve_root(lambda x: x, seed=-0.25, step=0.25)
    assert res.root == 0.0
    assert res.residual == 0.0


def test_no_sign_change_raises():
    with pytest.raises(NoRootError):
        solve_root(lambda x: x * x + 1.0, seed=0.0, max_steps=12)


def test_limits_respected():
    # root of x - 5 while the search is capped below 2: nothing to find
    with pytest.raises(NoRootError):
        solve_root(lambda x: x - 5.0, seed=1.0, lo_limit=0.0, hi_limit=2.0, max_steps=30)


def test_limits_containing_root():
    res = solve_root(lambda x: x - 0.5, seed=0.1, lo_limit=0.0, hi_limit=2.0)
    assert res.root == pytest.approx(0.5, abs=1e-12)


def test_scan_flags_unique_crossing():
    res = solve_root(lambda x: x - 1.0, seed=0.0, scan=15)
    assert res.unique_in_bracket is True


def test_scan_detects_multiple_crossings():
    # sin has many roots; a wide bracket shows several sign changes
    res = solve_root(math.sin, seed=2.0, step=2.0, scan=41)
    if res.bracket[1] - res.bracket[0] > 2 * math.pi:
        assert res.unique_in_bracket is False


def test_no_scan_leaves_flag_unset():
    res = solve_root(lambda x: x - 1.0, seed=0.0)
    assert res.unique_in_bracket is None


def test_evaluations_counted():
    res = solve_root(lambda x: x**3 - 9.0, seed=1.0)
    assert res.evaluations > 0
