"""Whitelist expression compiler."""

import math

import numpy as np
import pytest

from diffctrl.errors import ConfigError
from diffctrl.expressions import compile_expression


def test_polynomial():
    f = compile_expression("3*x^2 - 2*x + 1")
    assert f(2.0) == pytest.approx(9.0)
    xs = np.array([0.0, 1.0, -1.0])
    assert np.allclose(f(xs), [1.0, 2.0, 6.0])


def test_double_star_power():
    f = compile_expression("x**3")
    assert f(-2.0) == pytest.approx(-8.0)


def test_functions_and_constants():
    f = compile_expression("exp(-x) + sqrt(abs(x)) + pi")
    assert f(0.0) == pytest.approx(1.0 + math.pi)
    assert f(4.0) == pytest.approx(math.exp(-4.0) + 2.0 + math.pi)


def test_min_max_two_arguments():
    f = compile_expression("max(x, 0) - min(x, 0)")
    assert f(-3.0) == pytest.approx(3.0)
    assert f(5.0) == pytest.approx(5.0)


def test_unary_minus_and_division():
    f = compile_expression("-x / 2")
    assert f(5.0) == pytest.approx(-2.5)


def test_multiple_variables():
    g = compile_expression("a*t + b", variables=("t", "a", "b"))
    assert g(2.0, 3.0, 1.0) == pytest.approx(7.0)


def test_unknown_name_rejected():
    with pytest.raises(ConfigError):
        compile_expression("y + 1")


def test_unknown_function_rejected():
    with pytest.raises(ConfigError):
        compile_expression("gamma(x)")


def test_attribute_access_rejected():
    with pytest.raises(ConfigError):
        compile_expression("x.__class__")


def test_call_on_expression_rejected():
    with pytest.raises(ConfigError):
        compile_expression("(exp)(x)() ")


def test_import_like_payload_rejected():
    with pytest.raises(ConfigError):
        compile_expression("__import__('os').system('true')")


def test_comprehension_rejected():
    with pytest.raises(ConfigError):
        compile_expression("[x for x in (1,)]")


def test_syntax_error_reported_as_config_error():
    with pytest.raises(ConfigError):
        compile_expression("x +")


def test_vectorized_output_shape():
    f = compile_expression("x^2")
    xs = np.linspace(-1, 1, 7)
    out = f(xs)
    assert np.asarray(out).shape == xs.shape
