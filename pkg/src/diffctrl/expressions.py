"""Small arithmetic expression compiler for user-supplied coefficients.

Supports numbers, one or more named variables, + - * / ^ (or **), unary
minus, and a fixed set of functions. Compiles to a numpy-vectorized
callable via the ast module; nothing outside the whitelist can execute.
"""

from __future__ import annotations

import ast
import operator

import numpy as np

from .errors import ConfigError

_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}

_FUNCS = {
    "exp": np.exp,
    "log": np.log,
    "sqrt": np.sqrt,
    "abs": np.abs,
    "tanh": np.tanh,
    "sin": np.sin,
    "cos": np.cos,
    "min": np.minimum,
    "max": np.maximum,
}

_CONSTS = {"pi": np.pi, "e": np.e}


def compile_expression(text: str, variables: tuple[str, ...] = ("x",)):
    """Compile `text` to fn(**variables) -> ndarray; raises ConfigError."""
    if not isinstance(text, str) or not text.strip():
        raise ConfigError("expression must be a non-empty string")
    source = text.replace("^", "**")
    try:
        tree = ast.parse(source, mode="eval")
    except SyntaxError as exc:
        raise ConfigError(f"bad expression {text!r}: {exc.msg} (column {exc.offset})")

    def ev(node, env):
        if isinstance(node, ast.Expression):
            return ev(node.body, env)
        if isinstance(node, ast.Constant):
            if isinstance(node.value, (int, float)):
                return float(node.value)
            raise ConfigError(f"bad literal {node.value!r} in {text!r}")
        if isinstance(node, ast.Name):
            if node.id in env:
                return env[node.id]
            if node.id in _CONSTS:
                return _CONSTS[node.id]
            raise ConfigError(f"unknown name {node.id!r} in {text!r}")
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left, env), ev(node.right, env))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand, env)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.Call):
            if not isinstance(node.func, ast.Name) or node.func.id not in _FUNCS:
                raise ConfigError(f"function not allowed in {text!r}")
            if node.keywords:
                raise ConfigError(f"keyword arguments not allowed in {text!r}")
            args = [ev(a, env) for a in node.args]
            fn = _FUNCS[node.func.id]
            if node.func.id in ("min", "max"):
                if len(args) < 2:
                    raise ConfigError(f"{node.func.id} needs at least two arguments")
                out = args[0]
                for a in args[1:]:
                    out = fn(out, a)
                return out
            if len(args) != 1:
                raise ConfigError(f"{node.func.id} takes one argument")
            return fn(args[0])
        raise ConfigError(f"unsupported syntax in expression {text!r}")

    # validate once against dummy inputs so errors surface at compile time
    dummy = {v: np.asarray([0.5, 1.5]) for v in variables}
    try:
        ev(tree, dummy)
    except ConfigError:
        raise
    except Exception as exc:
        raise ConfigError(f"expression {text!r} failed to evaluate: {exc}")

    def fn(*args):
        if len(args) != len(variables):
            raise TypeError(f"expression expects {len(variables)} argument(s)")
        env = {v: np.asarray(a, dtype=float) for v, a in zip(variables, args)}
        out = ev(tree, env)
        return np.broadcast_to(np.asarray(out, dtype=float), env[variables[0]].shape).copy()

    fn.source = text
    return fn
