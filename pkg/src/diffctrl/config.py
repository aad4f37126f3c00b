"""Strict JSON experiment configs.

One JSON document describes one experiment: the model, the running cost,
the control cost weight, and exactly one of five modes (problem, sweep,
sim, verify, audit).  Parsing is strict: unknown keys are rejected with
their full dotted path, so a typo never silently falls back to a
default.  The raw document is kept on the parsed config for echoing into
reports.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .errors import ConfigError
from .models import BrownianMotion, GenericDiffusion, OrnsteinUhlenbeck
from .expressions import compile_expression
from .problems import ProblemSpec, make_cost
from .quadrature import QuadratureConfig

__all__ = ["ExperimentConfig", "load_config", "parse_config", "PROBLEMS", "MODES"]

MODES = ("problem", "sweep", "sim", "verify", "audit")
PROBLEMS = (
    "singular-discounted",
    "constrained-discounted",
    "singular-ergodic",
    "constrained-ergodic",
)

_MODEL_KEYS = {
    "bm": {"kind", "mu", "sigma"},
    "ou": {"kind", "kappa", "sigma"},
    "generic": {"kind", "drift", "sigma", "lower", "working_interval"},
}
_COST_KEYS = {"kind", "p", "expression", "kinks"}
_SWEEP_KEYS = {"axis", "grid", "r", "lambda", "x0"}
_SIM_KEYS = {
    "problem",
    "dt",
    "horizon",
    "n_paths",
    "seed",
    "x0",
    "burn_in_fraction",
    "antithetic",
    "threads",
    "backend",
    "extrapolate",
    "barrier_correction",
    "tail_completion",
}
_VERIFY_KEYS = {"rates", "points", "lambdas", "tol"}
_AUDIT_KEYS = {"r", "lambda"}
_QUAD_KEYS = {
    "abs_tol",
    "rel_tol",
    "max_subdivisions",
    "max_windows",
    "initial_window",
    "tail_consecutive",
}
_OUTPUT_KEYS = {"format", "path"}
_TOP_KEYS = {
    "model",
    "cost",
    "gamma",
    "r",
    "lambda",
    "x0",
    "quadrature",
    "output",
} | set(MODES)

_FORMATS = ("table", "json", "csv")


def _reject_unknown(d: dict, allowed: set, path: str) -> None:
    unknown = sorted(set(d) - allowed)
    if unknown:
        keys = ", ".join(f"{path}.{k}" if path else k for k in unknown)
        raise ConfigError(f"unknown config key(s): {keys}")


def _expect(cond: bool, msg: str) -> None:
    if not cond:
        raise ConfigError(msg)


def _num(d: dict, key: str, path: str, default=None, required=False):
    if key not in d:
        if required:
            raise ConfigError(f"missing required key {path}.{key}" if path else f"missing required key {key}")
        return default
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{path}.{key} must be a number, got {v!r}")
    if not math.isfinite(float(v)):
        raise ConfigError(f"{path}.{key} must be finite, got {v!r}")
    return float(v)


def _build_model(d, path="model"):
    _expect(isinstance(d, dict), f"{path} must be an object")
    kind = d.get("kind")
    if kind not in _MODEL_KEYS:
        raise ConfigError(f"{path}.kind must be one of {sorted(_MODEL_KEYS)}, got {kind!r}")
    _reject_unknown(d, _MODEL_KEYS[kind], path)
    if kind == "bm":
        return BrownianMotion(
            mu=_num(d, "mu", path, default=0.0), sigma=_num(d, "sigma", path, default=1.0)
        )
    if kind == "ou":
        return OrnsteinUhlenbeck(
            kappa=_num(d, "kappa", path, default=1.0),
            sigma=_num(d, "sigma", path, default=1.0),
        )
    for key in ("drift", "sigma"):
        _expect(isinstance(d.get(key), str), f"{path}.{key} must be an expression string")
    span = d.get("working_interval", [-30.0, 30.0])
    _expect(
        isinstance(span, list) and len(span) == 2,
        f"{path}.working_interval must be [lo, hi]",
    )
    return GenericDiffusion(
        drift=compile_expression(d["drift"]),
        sigma=compile_expression(d["sigma"]),
        lower=_num(d, "lower", path, default=-math.inf),
        working_interval=(float(span[0]), float(span[1])),
    )


def _build_cost(d, path="cost"):
    _expect(isinstance(d, dict), f"{path} must be an object")
    _reject_unknown(d, _COST_KEYS, path)
    if "expression" in d:
        _expect("kind" not in d, f"{path} takes either kind or expression, not both")
        kinks = d.get("kinks", [])
        _expect(isinstance(kinks, list), f"{path}.kinks must be a list")
        return make_cost("expression", expr=d["expression"], kinks=[float(k) for k in kinks])
    kind = d.get("kind")
    _expect(isinstance(kind, str), f"{path}.kind or {path}.expression is required")
    params = {}
    if "p" in d:
        params["p"] = _num(d, "p", path)
    return make_cost(kind, **params)


def _build_quadrature(d, path="quadrature"):
    _expect(isinstance(d, dict), f"{path} must be an object")
    _reject_unknown(d, _QUAD_KEYS, path)
    kwargs = {}
    for key in _QUAD_KEYS:
        if key in d:
            v = _num(d, key, path)
            kwargs[key] = int(v) if key in ("max_subdivisions", "max_windows", "tail_consecutive") else v
    try:
        return QuadratureConfig(**kwargs)
    except ValueError as err:
        raise ConfigError(f"{path}: {err}") from err


def _float_list(v, path):
    _expect(isinstance(v, list) and len(v) >= 1, f"{path} must be a non-empty list")
    out = []
    for i, t in enumerate(v):
        if isinstance(t, bool) or not isinstance(t, (int, float)):
            raise ConfigError(f"{path}[{i}] must be a number, got {t!r}")
        out.append(float(t))
    return out


@dataclass(frozen=True)
class ExperimentConfig:
    """One parsed experiment: a model/cost pair plus a single mode block."""

    mode: str
    model: object
    cost: object
    gamma: float
    spec: ProblemSpec
    r: float | None
    lam: float | None
    x0: float | None
    problem: str | None
    sweep: dict | None
    sim: dict | None
    verify: dict | None
    audit: dict | None
    quadrature: QuadratureConfig | None
    output_format: str
    output_path: str | None
    raw: dict = field(repr=False)

    def problem_name(self) -> str:
        """The problem this config solves or simulates."""
        if self.problem is not None:
            return self.problem
        if self.sim is not None:
            return self.sim["problem"]
        raise ConfigError(f"mode {self.mode!r} does not name a single problem")


def _validate_problem_rates(problem: str, r, lam) -> None:
    discounted = problem.endswith("-discounted")
    constrained = problem.startswith("constrained")
    if discounted:
        _expect(r is not None and r > 0, f"{problem} needs r > 0")
    else:
        _expect(r is None or r == 0.0, f"r does not apply to {problem}")
    if constrained:
        _expect(lam is not None and lam > 0, f"{problem} needs lambda > 0")
    else:
        _expect(lam is None, f"lambda does not apply to {problem}")


def parse_config(doc: dict, origin: str = "config") -> ExperimentConfig:
    _expect(isinstance(doc, dict), f"{origin}: top level must be a JSON object")
    _reject_unknown(doc, _TOP_KEYS, "")

    active = [m for m in MODES if m in doc]
    _expect(
        len(active) == 1,
        "exactly one of problem/sweep/sim/verify/audit must be present"
        + (f" (found {active})" if active else " (found none)"),
    )
    mode = active[0]

    _expect("model" in doc, "missing required key model")
    _expect("cost" in doc, "missing required key cost")
    model = _build_model(doc["model"])
    cost = _build_cost(doc["cost"])
    gamma = _num(doc, "gamma", "", required=True)
    spec = ProblemSpec(model, cost, gamma)

    r = _num(doc, "r", "")
    lam = _num(doc, "lambda", "")
    x0 = _num(doc, "x0", "")

    quad = _build_quadrature(doc["quadrature"]) if "quadrature" in doc else None

    out_fmt, out_path = "table", None
    if "output" in doc:
        out = doc["output"]
        _expect(isinstance(out, dict), "output must be an object")
        _reject_unknown(out, _OUTPUT_KEYS, "output")
        out_fmt = out.get("format", "table")
        _expect(out_fmt in _FORMATS, f"output.format must be one of {_FORMATS}, got {out_fmt!r}")
        out_path = out.get("path")
        _expect(
            out_path is None or isinstance(out_path, str), "output.path must be a string or null"
        )

    problem = sweep = sim = verify = audit = None

    if mode == "problem":
        problem = doc["problem"]
        _expect(problem in PROBLEMS, f"problem must be one of {PROBLEMS}, got {problem!r}")
        _validate_problem_rates(problem, r, lam)

    elif mode == "sweep":
        block = doc["sweep"]
        _expect(isinstance(block, dict), "sweep must be an object")
        _reject_unknown(block, _SWEEP_KEYS, "sweep")
        axis = block.get("axis")
        _expect(axis in ("lambda", "discount"), f"sweep.axis must be lambda or discount, got {axis!r}")
        sweep = {"axis": axis}
        if "grid" in block:
            sweep["grid"] = _float_list(block["grid"], "sweep.grid")
        sweep["r"] = _num(block, "r", "sweep", default=r if axis == "lambda" else None)
        sweep["lambda"] = _num(block, "lambda", "sweep", default=lam if axis == "discount" else None)
        sweep["x0"] = _num(block, "x0", "sweep", default=x0)
        if axis == "lambda" and sweep["r"] is None:
            sweep["r"] = 0.0

    elif mode == "sim":
        block = doc["sim"]
        _expect(isinstance(block, dict), "sim must be an object")
        _reject_unknown(block, _SIM_KEYS, "sim")
        prob = block.get("problem")
        _expect(prob in PROBLEMS, f"sim.problem must be one of {PROBLEMS}, got {prob!r}")
        _validate_problem_rates(prob, r, lam)
        ergodic = prob.endswith("-ergodic")
        sim = {
            "problem": prob,
            "dt": _num(block, "dt", "sim", default=1e-2),
            "horizon": _num(block, "horizon", "sim", default=1e4 if ergodic else 2e3),
            "n_paths": int(_num(block, "n_paths", "sim", default=2000)),
            "seed": int(_num(block, "seed", "sim", default=0)),
            "x0": _num(block, "x0", "sim", default=x0 if x0 is not None else 0.0),
            "burn_in_fraction": _num(block, "burn_in_fraction", "sim", default=0.1),
            "antithetic": block.get("antithetic", False),
            "threads": int(_num(block, "threads", "sim", default=1)),
            "backend": block.get("backend", "auto"),
            "extrapolate": block.get("extrapolate"),
            "barrier_correction": block.get("barrier_correction", True),
            "tail_completion": block.get("tail_completion", "auto"),
        }
        _expect(isinstance(sim["antithetic"], bool), "sim.antithetic must be a boolean")
        _expect(
            sim["extrapolate"] is None or isinstance(sim["extrapolate"], bool),
            "sim.extrapolate must be a boolean or null (auto)",
        )
        _expect(
            isinstance(sim["barrier_correction"], bool),
            "sim.barrier_correction must be a boolean",
        )
        _expect(
            sim["tail_completion"] in ("auto", True, False),
            'sim.tail_completion must be true, false, or "auto"',
        )
        _expect(sim["backend"] in ("auto", "compiled", "python"), "sim.backend must be auto|compiled|python")

    elif mode == "verify":
        block = doc["verify"]
        _expect(isinstance(block, dict), "verify must be an object")
        _reject_unknown(block, _VERIFY_KEYS, "verify")
        verify = {
            "rates": _float_list(block.get("rates", [1.0, 10.0]), "verify.rates"),
            "points": _float_list(block.get("points", [-1.0, 0.3, 1.2]), "verify.points"),
            "lambdas": _float_list(block.get("lambdas", [10.0, 100.0, 1000.0]), "verify.lambdas"),
            "tol": _num(block, "tol", "verify", default=1e-6),
        }
        for s in verify["rates"]:
            _expect(s > 0, "verify.rates must be positive")
        for lamv in verify["lambdas"]:
            _expect(lamv > 0, "verify.lambdas must be positive")

    else:  # audit
        block = doc["audit"]
        if block is True:
            block = {}
        _expect(isinstance(block, dict), "audit must be an object or true")
        _reject_unknown(block, _AUDIT_KEYS, "audit")
        audit = {
            "r": _num(block, "r", "audit", default=r),
            "lambda": _num(block, "lambda", "audit", default=lam),
        }

    return ExperimentConfig(
        mode=mode,
        model=model,
        cost=cost,
        gamma=gamma,
        spec=spec,
        r=r,
        lam=lam,
        x0=x0,
        problem=problem,
        sweep=sweep,
        sim=sim,
        verify=verify,
        audit=audit,
        quadrature=quad,
        output_format=out_fmt,
        output_path=out_path,
        raw=doc,
    )


def load_config(path: str) -> ExperimentConfig:
    """Read and parse one experiment document, with parse-error context."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except FileNotFoundError as err:
        raise ConfigError(f"config file not found: {path}") from err
    except json.JSONDecodeError as err:
        raise ConfigError(f"{path}: invalid JSON at line {err.lineno} column {err.colno}: {err.msg}") from err
    return parse_config(doc, origin=path)
