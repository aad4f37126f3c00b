"""Running costs and the (model, cost, gamma) problem bundle.

The running cost pi is charged continuously; gamma is the proportional
cost per unit of downward displacement. The combined yields

    theta_r(x) = pi(x) + gamma (mu(x) - r x)        (discounted)
    pi_mu(x)   = pi(x) + gamma mu(x)                (ergodic)

are what the optimality conditions integrate.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigError
from .expressions import compile_expression


class CostFunction:
    """Vectorized running cost with known kink locations.

    kinks: points where pi is continuous but not smooth; quadrature panels
    split there so convergence stays spectral.
    """

    def __init__(self, fn, name: str, kinks: tuple[float, ...] = (), params: dict | None = None):
        self._fn = fn
        self.name = name
        self.kinks = tuple(float(k) for k in kinks)
        self.params = dict(params or {})

    def __call__(self, x):
        return np.asarray(self._fn(np.asarray(x, dtype=float)), dtype=float)

    def describe(self) -> dict:
        return {"name": self.name, **self.params}

    def __repr__(self):
        return f"CostFunction({self.name})"


def quadratic() -> CostFunction:
    return CostFunction(lambda x: x * x, "quadratic")


def absolute() -> CostFunction:
    return CostFunction(np.abs, "absolute", kinks=(0.0,))


def power(p: float) -> CostFunction:
    if p < 1:
        raise ConfigError("power cost needs p >= 1 (convexity near the origin fails otherwise)")
    return CostFunction(lambda x: np.abs(x) ** p, "power", kinks=(0.0,), params={"p": p})


def positive_part() -> CostFunction:
    return CostFunction(lambda x: np.maximum(x, 0.0), "positive_part", kinks=(0.0,))


def cost_from_expression(text: str, kinks: tuple[float, ...] = ()) -> CostFunction:
    fn = compile_expression(text, ("x",))
    return CostFunction(fn, "expression", kinks=kinks, params={"expr": text})


_BUILTIN_COSTS = {
    "quadratic": lambda params: quadratic(),
    "absolute": lambda params: absolute(),
    "power": lambda params: power(params.get("p", 2.0)),
    "positive_part": lambda params: positive_part(),
}


def make_cost(kind: str, **params) -> CostFunction:
    """Cost factory used by the CLI config layer."""
    if kind == "expression":
        return cost_from_expression(params["expr"], tuple(params.get("kinks", ())))
    if kind in _BUILTIN_COSTS:
        return _BUILTIN_COSTS[kind](params)
    raise ConfigError(f"unknown cost kind {kind!r}")


class ProblemSpec:
    """Model + running cost + proportional control cost."""

    def __init__(self, model, cost: CostFunction, gamma: float):
        if gamma <= 0:
            raise ConfigError("gamma must be positive")
        self.model = model
        self.cost = cost
        self.gamma = float(gamma)

    def theta(self, r: float):
        """Discounted push-flow yield theta_r = pi + gamma(mu - r id)."""
        if r <= 0:
            raise ConfigError("discount rate must be positive")
        model, cost, gamma = self.model, self.cost, self.gamma

        def fn(x):
            x = np.asarray(x, dtype=float)
            return cost(x) + gamma * (model.drift(x) - r * x)

        return fn

    def pi_mu(self):
        """Ergodic yield pi + gamma mu."""
        model, cost, gamma = self.model, self.cost, self.gamma

        def fn(x):
            x = np.asarray(x, dtype=float)
            return cost(x) + gamma * model.drift(x)

        return fn

    def describe(self) -> dict:
        return {
            "model": self.model.describe(),
            "cost": self.cost.describe(),
            "gamma": self.gamma,
        }
