"""Command line front end.

Five subcommands, each driven by a JSON experiment file:

    solve      one threshold problem, reported with its diagnostics
    sweep      thresholds along a lambda or discount grid
    simulate   Monte Carlo check of a solved policy against its value
    verify     identity residuals and limit trends of the functionals
    audit      standing-assumption checks for a model/cost pair

Exit codes: 0 success, 2 configuration or precondition or verification
failure, 3 numerical failure.  The active block of the config must match
the subcommand, so a file written for one action cannot silently drive
another.

JSON output embeds the parsed config, which makes every result file
self-describing and replayable: feeding the embedded config back through
the same subcommand reproduces the result bit for bit.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import warnings
from dataclasses import replace

from .asymptotics import (
    feller_approx_report,
    functional_limit_report,
    sweep_discount,
    sweep_lambda,
)
from .audit import audit_discounted, audit_ergodic, recurrence_check
from .config import ExperimentConfig, load_config
from .errors import ConfigError, NumericError, PreconditionError
from .functionals import (
    functional_K,
    functional_L,
    mass_identity_residuals,
    resolvent_identity_residuals,
)
from .quadrature import SOLVER_CONFIG, QuadratureConfig
from .sim import (
    SimConfig,
    corrected_barrier,
    estimate_cost,
    extrapolate_dt,
    simulate_constrained,
    simulate_reflected,
)
from .solvers import (
    solve_constrained_discounted,
    solve_constrained_ergodic,
    solve_singular_discounted,
    solve_singular_ergodic,
)

__all__ = ["main", "OUT_DIR_ENV"]

# default directory for relative --out / output.path targets
OUT_DIR_ENV = "DIFFCTRL_OUT_DIR"

SCHEMA_VERSION = 1

_MODE_FOR = {
    "solve": "problem",
    "sweep": "sweep",
    "simulate": "sim",
    "verify": "verify",
    "audit": "audit",
}

_REPRESENTATIONS = ("centered", "integral", "derivative")


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)


def _table(pairs) -> str:
    width = max(len(k) for k, _ in pairs)
    return "\n".join(f"{k.ljust(width)}  {_fmt(v)}" for k, v in pairs) + "\n"


def _kv_csv(pairs) -> str:
    lines = ["field,value"]
    lines += [f"{k},{_fmt(v)}" for k, v in pairs]
    return "\n".join(lines) + "\n"


def _envelope(command: str, cfg: ExperimentConfig, result: dict) -> str:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "config": cfg.raw,
        "result": result,
    }
    return json.dumps(doc, indent=2) + "\n"


def _resolve_out(cfg: ExperimentConfig, args) -> str | None:
    path = args.out if args.out is not None else cfg.output_path
    if path is None:
        return None
    if not os.path.isabs(path):
        base = os.environ.get(OUT_DIR_ENV)
        if base:
            path = os.path.join(base, path)
    return path


def _emit(text: str, cfg: ExperimentConfig, args) -> str | None:
    """Write to the resolved output path, or stdout; returns the path used."""
    path = _resolve_out(cfg, args)
    if path is None:
        sys.stdout.write(text)
        return None
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    print(f"wrote {path}")
    return path


def _quadrature(cfg: ExperimentConfig, args) -> QuadratureConfig:
    if args.tol_quad is not None:
        if args.tol_quad <= 0:
            raise ConfigError("--tol-quad must be positive")
        return QuadratureConfig(abs_tol=args.tol_quad, rel_tol=args.tol_quad)
    return cfg.quadrature if cfg.quadrature is not None else SOLVER_CONFIG


def _root_tol(args) -> float:
    if args.tol_root is None:
        return 1e-12
    if args.tol_root <= 0:
        raise ConfigError("--tol-root must be positive")
    return args.tol_root


def _pick_format(cfg: ExperimentConfig, args) -> str:
    return args.format if args.format is not None else cfg.output_format


def _solve_problem(cfg: ExperimentConfig, quad, root_tol, problem=None):
    name = problem if problem is not None else cfg.problem_name()
    spec = cfg.spec
    if name == "singular-discounted":
        return solve_singular_discounted(spec, cfg.r, cfg=quad, root_tol=root_tol)
    if name == "constrained-discounted":
        return solve_constrained_discounted(
            spec, cfg.r, cfg.lam, cfg=quad, root_tol=root_tol
        )
    if name == "singular-ergodic":
        return solve_singular_ergodic(spec, cfg=quad, root_tol=root_tol)
    return solve_constrained_ergodic(spec, cfg.lam, cfg=quad, root_tol=root_tol)


def _run_solve(cfg: ExperimentConfig, args) -> int:
    quad = _quadrature(cfg, args)
    sol = _solve_problem(cfg, quad, _root_tol(args))
    discounted = sol.problem.endswith("-discounted")

    pairs = [("problem", sol.problem), ("threshold", sol.threshold), ("gamma", sol.gamma)]
    if sol.r is not None:
        pairs.append(("r", sol.r))
    if sol.lam is not None:
        pairs.append(("lambda", sol.lam))
    if sol.beta is not None:
        pairs.append(("beta", sol.beta))
    if sol.beta_alt is not None:
        pairs.append(("beta_alt", sol.beta_alt))
    value_x0 = None
    if discounted and cfg.x0 is not None:
        value_x0 = float(sol.value_at(cfg.x0))
        pairs.append((f"value(x0={cfg.x0:g})", value_x0))
    pairs += [
        ("x_star", sol.x_star),
        ("root_residual", sol.root_residual),
        ("continuity_gap", sol.continuity_gap),
        ("smooth_fit_gap", sol.smooth_fit_gap),
        ("audit", "passed" if sol.audit.passed else "FAILED"),
    ]

    fmt = _pick_format(cfg, args)
    if fmt == "json":
        result = sol.to_dict()
        if value_x0 is not None:
            result["x0"] = cfg.x0
            result["value_x0"] = value_x0
        text = _envelope("solve", cfg, result)
    elif fmt == "csv":
        text = _kv_csv(pairs)
    else:
        text = _table(pairs)
    _emit(text, cfg, args)
    return 0


def _sweep_table(res) -> str:
    cols = ("param", "threshold", "target_thr", "thr_gap", "value", "target_val", "value_gap")
    lines = ["  ".join(c.rjust(13) for c in cols)]
    for row in res.rows:
        vals = (
            row.param,
            row.threshold,
            row.target_threshold,
            row.threshold_gap,
            row.value,
            row.target_value,
            row.value_gap,
        )
        lines.append("  ".join(f"{v:13.6g}" for v in vals))
    lines.append("")
    lines.append(f"axis {res.axis}  problem {res.problem}")
    for key, val in res.targets.items():
        lines.append(f"target {key} = {_fmt(val)}")
    order = res.diagnostics.get("order_estimate")
    if order is not None:
        lines.append(f"empirical gap order {order:.3f}")
    limit = res.diagnostics.get("limit_estimate")
    if limit is not None:
        lines.append(f"extrapolated threshold limit {_fmt(limit)}")
    for note in res.diagnostics.get("warnings", ()):
        lines.append(f"warning: {note}")
    return "\n".join(lines) + "\n"


def _run_sweep(cfg: ExperimentConfig, args) -> int:
    quad = _quadrature(cfg, args)
    sw = cfg.sweep
    kwargs = {"x0": sw["x0"], "cfg": quad}
    if sw.get("grid") is not None:
        kwargs["grid"] = sw["grid"]
    if sw["axis"] == "lambda":
        res = sweep_lambda(cfg.spec, r=sw["r"], **kwargs)
    else:
        res = sweep_discount(cfg.spec, lam=sw["lambda"], **kwargs)

    fmt = _pick_format(cfg, args)
    if fmt == "json":
        text = _envelope("sweep", cfg, res.to_dict())
    elif fmt == "csv":
        text = res.to_csv()
    else:
        text = _sweep_table(res)
    _emit(text, cfg, args)
    return 0


def _run_simulate(cfg: ExperimentConfig, args) -> int:
    quad = _quadrature(cfg, args)
    sim = cfg.sim
    problem = sim["problem"]
    ergodic = problem.endswith("-ergodic")
    constrained = problem.startswith("constrained")
    sol = _solve_problem(cfg, quad, _root_tol(args), problem=problem)

    discount = 0.0 if ergodic else float(cfg.r)
    seed = args.seed if args.seed is not None else sim["seed"]
    threads = args.threads if args.threads is not None else sim["threads"]
    base = SimConfig(
        dt=sim["dt"],
        horizon=sim["horizon"],
        n_paths=sim["n_paths"],
        seed=seed,
        x0=sim["x0"],
        discount=discount,
        burn_in_fraction=sim["burn_in_fraction"],
        antithetic=sim["antithetic"],
        backend=sim["backend"],
        threads=threads,
    )

    tail_on = sim["tail_completion"]
    if tail_on == "auto":
        # complete the truncated objective with the discounted value of the
        # final state whenever the cut tail is not already negligible
        tail_on = not ergodic and math.exp(-discount * base.horizon) > 1e-12
    if tail_on and ergodic:
        raise ConfigError("tail completion applies to discounted problems only")
    tail = sol.value_at if tail_on else None

    extrap = sim["extrapolate"]
    if extrap is None:
        # reflected ergodic runs carry an O(dt) barrier displacement bias
        # even after the continuity correction, so pair two step sizes
        extrap = ergodic and not constrained

    def run(run_cfg: SimConfig):
        if constrained:
            return simulate_constrained(cfg.spec, sol.threshold, cfg.lam, run_cfg)
        barrier = sol.threshold
        if sim["barrier_correction"]:
            barrier = corrected_barrier(cfg.model, barrier, run_cfg.dt)
        return simulate_reflected(cfg.spec, barrier, run_cfg)

    est = estimate_cost(run(base), tail_value=tail)
    if extrap:
        coarse = replace(base, dt=2.0 * base.dt, seed=base.seed + 1)
        est = extrapolate_dt(est, estimate_cost(run(coarse), tail_value=tail))

    target = float(sol.beta) if ergodic else float(sol.value_at(sim["x0"]))
    gap = est.mean - target
    se = est.std_error
    if se > 0:
        z = gap / se
    else:
        z = 0.0 if gap == 0.0 else math.inf
    ok = abs(gap) <= 3.0 * se

    pairs = [
        ("problem", problem),
        ("policy", "poisson-impulse" if constrained else "reflect"),
        ("threshold", sol.threshold),
        ("target", target),
        ("estimate", est.mean),
        ("std_error", se),
        ("z", z),
        ("n_paths", est.n_paths),
        ("dt", base.dt),
        ("horizon", base.horizon),
        ("seed", seed),
        ("backend", est.backend),
        ("extrapolated", extrap),
        ("tail_completed", bool(tail_on)),
        ("barrier_corrected", bool(sim["barrier_correction"]) and not constrained),
        ("agreement_3se", "pass" if ok else "FAIL"),
    ]

    fmt = _pick_format(cfg, args)
    if fmt == "json":
        result = est.to_dict()
        result.update(
            {
                "problem": problem,
                "target": target,
                "z": z,
                "dt": base.dt,
                "horizon": base.horizon,
                "extrapolated": extrap,
                "tail_completed": bool(tail_on),
                "barrier_corrected": bool(sim["barrier_correction"]) and not constrained,
                "passed": ok,
            }
        )
        text = _envelope("simulate", cfg, result)
    elif fmt == "csv":
        text = _kv_csv(pairs)
    else:
        text = _table(pairs)
    path = _emit(text, cfg, args)
    if path is not None:
        print(f"simulate {problem}: {'pass' if ok else 'FAIL'} (z = {z:+.2f})")
    return 0 if ok else 2


def _spread(values) -> float:
    ref = max(1.0, abs(values[0]))
    return (max(values) - min(values)) / ref


def _run_verify(cfg: ExperimentConfig, args) -> int:
    quad = _quadrature(cfg, args)
    ver = cfg.verify
    spec = cfg.spec
    model, cost, gamma = cfg.model, cfg.cost, cfg.gamma
    kinks = cost.kinks
    tol = ver["tol"]
    rates, points, lambdas = ver["rates"], ver["points"], ver["lambdas"]

    # rows: (name, value, bound, passed); bound None marks a trend check
    rows: list[tuple[str, float, float | None, bool]] = []
    probe_lam = lambdas[0]

    for s in rates:
        for x in points:
            res = resolvent_identity_residuals(
                model, s, probe_lam, cost, gamma, x, cfg=quad, kinks=kinks
            )
            for key, val in sorted(res.items()):
                rows.append((f"{key}[r={s:g},x={x:g}]", val, tol, val <= tol))
            mass = mass_identity_residuals(model, s, x, cfg=quad)
            rows.append((f"mass_lower[s={s:g},x={x:g}]", mass["lower"], tol, mass["lower"] <= tol))
            rows.append((f"mass_upper[s={s:g},x={x:g}]", mass["upper"], tol, mass["upper"] <= tol))
            f = spec.theta(s)
            for tag, fn in (("K", functional_K), ("L", functional_L)):
                vals = [
                    fn(model, s, f, x, representation=rep, cfg=quad, kinks=kinks)
                    for rep in _REPRESENTATIONS
                ]
                sp = _spread(vals)
                rows.append((f"{tag}_representations[s={s:g},x={x:g}]", sp, tol, sp <= tol))

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        feller = feller_approx_report(spec, lambdas, points, r=rates[0], cfg=quad)
        rows.append(
            (
                "feller_sup_decreasing",
                feller.rows[-1].sup_residual,
                None,
                feller.decreasing,
            )
        )
        lam_rep = functional_limit_report(
            spec, points, lambdas, axis="lambda", r=rates[0], cfg=quad
        )
        worst = max(max(r.k_gap, r.l_gap) for r in lam_rep.rows)
        rows.append(
            ("lambda_limit_monotone", worst, None, len(lam_rep.non_monotone) == 0)
        )
        if len(rates) >= 2 and recurrence_check(model).passed:
            grid = sorted(rates, reverse=True)
            disc_rep = functional_limit_report(
                spec, points, grid, axis="discount", cfg=quad
            )
            worst = max(max(r.k_gap, r.l_gap) for r in disc_rep.rows)
            rows.append(
                ("discount_limit_monotone", worst, None, len(disc_rep.non_monotone) == 0)
            )

    passed = all(ok for _, _, _, ok in rows)

    fmt = _pick_format(cfg, args)
    if fmt == "json":
        result = {
            "passed": passed,
            "tol": tol,
            "checks": [
                {"name": name, "value": val, "tol": bound, "passed": ok}
                for name, val, bound, ok in rows
            ],
        }
        text = _envelope("verify", cfg, result)
    elif fmt == "csv":
        lines = ["name,value,tol,passed"]
        for name, val, bound, ok in rows:
            bound_s = _fmt(bound) if bound is not None else ""
            lines.append(f"{name},{_fmt(val)},{bound_s},{ok}")
        text = "\n".join(lines) + "\n"
    else:
        lines = []
        for name, val, bound, ok in rows:
            mark = "ok  " if ok else "FAIL"
            bound_s = f" (tol {bound:g})" if bound is not None else ""
            lines.append(f"[{mark}] {name}: {val:.3e}{bound_s}")
        lines.append(f"verify: {'all checks passed' if passed else 'FAILED'}")
        text = "\n".join(lines) + "\n"
    path = _emit(text, cfg, args)
    if path is not None:
        print(f"verify: {'pass' if passed else 'FAIL'}")
    return 0 if passed else 2


def _run_audit(cfg: ExperimentConfig, args) -> int:
    quad = _quadrature(cfg, args)
    aud = cfg.audit
    r, lam = aud["r"], aud["lambda"]
    if r is not None and r > 0:
        report = audit_discounted(cfg.spec, r, lam=lam, cfg=quad)
    else:
        report = audit_ergodic(cfg.spec, lam=lam, cfg=quad)

    fmt = _pick_format(cfg, args)
    if fmt == "json":
        text = _envelope("audit", cfg, report.to_dict())
    elif fmt == "csv":
        lines = ["name,passed,detail"]
        for chk in report.checks:
            detail = chk.detail.replace(",", ";")
            lines.append(f"{chk.name},{chk.passed},{detail}")
        text = "\n".join(lines) + "\n"
    else:
        text = report.summary() + "\n"
    path = _emit(text, cfg, args)
    if path is not None:
        print(f"audit: {'pass' if report.passed else 'FAIL'}")
    return 0 if report.passed else 2


_HANDLERS = {
    "solve": _run_solve,
    "sweep": _run_sweep,
    "simulate": _run_simulate,
    "verify": _run_verify,
    "audit": _run_audit,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="diffctrl",
        description="Threshold control of one-dimensional diffusions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "solve": "solve one threshold problem",
        "sweep": "thresholds along a lambda or discount grid",
        "simulate": "Monte Carlo check of a solved policy",
        "verify": "identity residuals and limit trends",
        "audit": "standing-assumption checks",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", required=True, help="JSON experiment file")
        p.add_argument(
            "--out",
            help=f"output file; relative paths resolve against ${OUT_DIR_ENV} when set",
        )
        p.add_argument("--format", choices=("table", "json", "csv"))
        p.add_argument("--seed", type=int, help="Monte Carlo seed override")
        p.add_argument("--tol-quad", type=float, help="quadrature tolerance override")
        p.add_argument("--tol-root", type=float, help="root-solve tolerance override")
        p.add_argument("--threads", type=int, help="simulation worker threads")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        want = _MODE_FOR[args.command]
        if cfg.mode != want:
            raise ConfigError(
                f"config drives {cfg.mode!r} but subcommand {args.command!r} needs {want!r}"
            )
        return _HANDLERS[args.command](cfg, args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    except PreconditionError as err:
        print(f"precondition failed: {err}", file=sys.stderr)
        return 2
    except NumericError as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
