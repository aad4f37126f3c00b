"""Parameter sweeps connecting the four control problems.

The problems form a square: raising the opportunity rate lam turns the
Poisson-constrained problems into their singular counterparts, and sending
the discount r to zero turns the discounted problems into the ergodic
ones.  `sweep_lambda` and `sweep_discount` walk one edge of that square,
solving the moving problem at each grid point and comparing against the
fixed corner target; `functional_limit_report` and `feller_approx_report`
check the underlying resolvent-level limits directly.

No extrapolation is performed beyond a diagnostic Aitken estimate of the
limiting threshold; the grids themselves are the statement.  Finite-grid
monotonicity failures are recorded as warnings, not errors, since the
limits come with no rate attached.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .audit import recurrence_check
from .errors import DiffctrlError, PreconditionError
from .functionals import functional_H, functional_K, functional_L, resolvent
from .problems import ProblemSpec
from .quadrature import SOLVER_CONFIG, QuadratureConfig
from .solvers import (
    SCHEMA_VERSION,
    Solution,
    solve_constrained_discounted,
    solve_constrained_ergodic,
    solve_singular_discounted,
    solve_singular_ergodic,
)

__all__ = [
    "DEFAULT_LAMBDA_GRID",
    "DEFAULT_DISCOUNT_GRID",
    "SweepRow",
    "SweepResult",
    "FunctionalLimitRow",
    "FunctionalLimitReport",
    "FellerRow",
    "FellerReport",
    "sweep_lambda",
    "sweep_discount",
    "functional_limit_report",
    "feller_approx_report",
]

DEFAULT_LAMBDA_GRID: tuple[float, ...] = tuple(float(2**k) for k in range(11))
DEFAULT_DISCOUNT_GRID: tuple[float, ...] = tuple(10.0**-k for k in range(5))

CSV_HEADER = (
    "axis,param,threshold,target_threshold,threshold_gap,"
    "value,target_value,value_gap"
)


def _fmt(v: float) -> str:
    return f"{float(v):.17g}"


@dataclass(frozen=True)
class SweepRow:
    param: float
    threshold: float
    target_threshold: float
    value: float
    target_value: float

    @property
    def threshold_gap(self) -> float:
        return abs(self.threshold - self.target_threshold)

    @property
    def value_gap(self) -> float:
        return abs(self.value - self.target_value)


@dataclass(frozen=True)
class SweepResult:
    """One edge of the relation square, row per grid point.

    `rows` are ordered by parameter value regardless of evaluation order.
    `diagnostics` carries the gap sequences, an empirical convergence-order
    estimate from successive gap ratios, an Aitken delta-squared estimate
    of the limiting threshold, and any monotonicity warnings.
    """

    axis: str
    problem: str
    rows: tuple[SweepRow, ...]
    targets: dict
    diagnostics: dict = field(repr=False)

    @property
    def params(self) -> tuple[float, ...]:
        return tuple(row.param for row in self.rows)

    @property
    def thresholds(self) -> tuple[float, ...]:
        return tuple(row.threshold for row in self.rows)

    @property
    def threshold_gaps(self) -> tuple[float, ...]:
        return tuple(row.threshold_gap for row in self.rows)

    @property
    def value_gaps(self) -> tuple[float, ...]:
        return tuple(row.value_gap for row in self.rows)

    def to_csv(self) -> str:
        lines = [CSV_HEADER]
        for row in self.rows:
            lines.append(
                ",".join(
                    [
                        self.axis,
                        _fmt(row.param),
                        _fmt(row.threshold),
                        _fmt(row.target_threshold),
                        _fmt(row.threshold_gap),
                        _fmt(row.value),
                        _fmt(row.target_value),
                        _fmt(row.value_gap),
                    ]
                )
            )
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "axis": self.axis,
            "problem": self.problem,
            "targets": dict(self.targets),
            "rows": [
                {
                    "param": row.param,
                    "threshold": row.threshold,
                    "target_threshold": row.target_threshold,
                    "threshold_gap": row.threshold_gap,
                    "value": row.value,
                    "target_value": row.target_value,
                    "value_gap": row.value_gap,
                }
                for row in self.rows
            ],
            "diagnostics": self.diagnostics,
        }

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)


def _annotate(label: str, thunk: Callable[[], Solution]) -> Solution:
    try:
        return thunk()
    except DiffctrlError as err:
        raise type(err)(f"{label}: {err}") from err


def _validate_grid(grid: Sequence[float], increasing: bool, minimum: int) -> np.ndarray:
    arr = np.asarray(list(grid), dtype=float)
    if arr.ndim != 1 or arr.size < minimum:
        raise PreconditionError(
            f"grid needs at least {minimum} points, got {arr.size}"
        )
    if not np.all(np.isfinite(arr)) or np.any(arr < 0):
        raise PreconditionError("grid values must be finite and nonnegative")
    diffs = np.diff(arr)
    if increasing and not np.all(diffs > 0):
        raise PreconditionError("grid must be strictly increasing")
    if not increasing and not np.all(diffs < 0):
        raise PreconditionError("grid must be strictly decreasing")
    return arr


def _order_estimates(params: np.ndarray, gaps: Sequence[float], axis: str) -> list:
    """Empirical p with gap ~ C*param^{-p} (lambda) or C*param^{p} (discount)."""
    orders: list[float | None] = []
    for i in range(1, len(gaps)):
        g0, g1 = gaps[i - 1], gaps[i]
        if g0 <= 0 or g1 <= 0:
            orders.append(None)
            continue
        if axis == "lambda":
            span = math.log(params[i] / params[i - 1])
        else:
            span = math.log(params[i - 1] / params[i])
        orders.append(math.log(g0 / g1) / span)
    return orders


def _aitken(seq: Sequence[float]) -> float | None:
    """Delta-squared estimate of the limit from the last three iterates."""
    if len(seq) < 3:
        return None
    t0, t1, t2 = seq[-3], seq[-2], seq[-1]
    denom = (t2 - t1) - (t1 - t0)
    if denom == 0 or abs(denom) < 1e-14 * (abs(t2) + 1):
        return None
    return t2 - (t2 - t1) ** 2 / denom


def _monotone_flags(name: str, gaps: Sequence[float], notes: list) -> bool:
    drops = all(b < a for a, b in zip(gaps, gaps[1:]))
    if not drops:
        notes.append(f"{name} gap sequence is not strictly decreasing")
    if gaps and not gaps[-1] < gaps[0]:
        notes.append(f"{name} final gap does not improve on the first")
    return drops


def _finish(
    axis: str,
    problem: str,
    params: np.ndarray,
    rows: list[SweepRow],
    targets: dict,
    fixed: dict,
) -> SweepResult:
    rows.sort(key=lambda row: row.param if axis == "lambda" else -row.param)
    gaps = [row.threshold_gap for row in rows]
    vgaps = [row.value_gap for row in rows]
    notes: list[str] = []
    g_mono = _monotone_flags("threshold", gaps, notes)
    v_mono = _monotone_flags("value", vgaps, notes)
    orders = _order_estimates(params, gaps, axis)
    finite = [p for p in orders if p is not None]
    diagnostics = {
        "gap_sequence": gaps,
        "value_gap_sequence": vgaps,
        "threshold_monotone": g_mono,
        "value_monotone": v_mono,
        "order_sequence": orders,
        "order_estimate": finite[-1] if finite else None,
        "limit_estimate": _aitken([row.threshold for row in rows]),
        "warnings": notes,
        **fixed,
    }
    for note in notes:
        warnings.warn(f"{problem} ({axis} sweep): {note}", stacklevel=3)
    return SweepResult(axis, problem, tuple(rows), targets, diagnostics)


def sweep_lambda(
    spec: ProblemSpec,
    grid: Sequence[float] = DEFAULT_LAMBDA_GRID,
    r: float = 0.0,
    x0: float | None = None,
    cfg: QuadratureConfig = SOLVER_CONFIG,
    run_audit: bool = True,
) -> SweepResult:
    """Constrained problems along increasing lam, against the singular target.

    With r > 0 compares thresholds and values V(x0) of the discounted pair
    (x0 defaults to the singular threshold); with r = 0 compares the
    ergodic thresholds and average costs beta.
    """
    params = _validate_grid(grid, increasing=True, minimum=4)
    if np.any(params <= 0):
        raise PreconditionError("lambda grid must be positive")
    if r < 0:
        raise PreconditionError(f"discount rate must be nonnegative, got {r!r}")

    if r > 0:
        target = _annotate(
            "singular target", lambda: solve_singular_discounted(spec, r, cfg, run_audit=run_audit)
        )
        anchor = float(target.threshold if x0 is None else x0)
        target_value = float(target.value_at(anchor))
        problem = "constrained-discounted"

        def solve_one(lam: float) -> SweepRow:
            sol = _annotate(
                f"lambda={lam:g}",
                lambda: solve_constrained_discounted(spec, r, lam, cfg, run_audit=run_audit),
            )
            return SweepRow(
                lam, sol.threshold, target.threshold, float(sol.value_at(anchor)), target_value
            )

        fixed = {"r": r, "x0": anchor, "target_problem": "singular-discounted"}
    else:
        target = _annotate(
            "singular target", lambda: solve_singular_ergodic(spec, cfg, run_audit=run_audit)
        )
        anchor = None
        target_value = float(target.beta)
        problem = "constrained-ergodic"

        def solve_one(lam: float) -> SweepRow:
            sol = _annotate(
                f"lambda={lam:g}",
                lambda: solve_constrained_ergodic(spec, lam, cfg, run_audit=run_audit),
            )
            return SweepRow(lam, sol.threshold, target.threshold, float(sol.beta), target_value)

        fixed = {"r": 0.0, "x0": None, "target_problem": "singular-ergodic"}

    rows = [solve_one(float(lam)) for lam in params]
    targets = {"threshold": float(target.threshold), "value": target_value}
    return _finish("lambda", problem, params, rows, targets, fixed)


def sweep_discount(
    spec: ProblemSpec,
    grid: Sequence[float] = DEFAULT_DISCOUNT_GRID,
    lam: float | None = None,
    x0: float | None = None,
    cfg: QuadratureConfig = SOLVER_CONFIG,
    run_audit: bool = True,
) -> SweepResult:
    """Discounted problems along r decreasing to 0, against the ergodic target.

    Compares thresholds and the Abelian quantity r*V(x0) against beta.
    `lam=None` walks the singular edge, otherwise the constrained one at
    that fixed rate.  The model must be recurrent for the ergodic target
    to exist, so transient models are rejected up front.
    """
    params = _validate_grid(grid, increasing=False, minimum=4)
    if np.any(params <= 0):
        raise PreconditionError("discount grid must stay positive (limit only)")
    rec = recurrence_check(spec.model)
    if not rec.passed:
        raise PreconditionError(
            f"discount sweep needs a recurrent model: {rec.detail}"
        )

    if lam is None:
        target = _annotate(
            "ergodic target", lambda: solve_singular_ergodic(spec, cfg, run_audit=run_audit)
        )
        problem = "singular-discounted"

        def solve_one(r: float) -> Solution:
            return _annotate(
                f"r={r:g}", lambda: solve_singular_discounted(spec, r, cfg, run_audit=run_audit)
            )

        fixed = {"lam": None, "target_problem": "singular-ergodic"}
    else:
        if lam <= 0:
            raise PreconditionError(f"opportunity rate must be positive, got {lam!r}")
        target = _annotate(
            "ergodic target",
            lambda: solve_constrained_ergodic(spec, lam, cfg, run_audit=run_audit),
        )
        problem = "constrained-discounted"

        def solve_one(r: float) -> Solution:
            return _annotate(
                f"r={r:g}",
                lambda: solve_constrained_discounted(spec, r, lam, cfg, run_audit=run_audit),
            )

        fixed = {"lam": lam, "target_problem": "constrained-ergodic"}

    anchor = float(target.threshold if x0 is None else x0)
    beta = float(target.beta)
    rows = []
    for r in params:
        sol = solve_one(float(r))
        rows.append(
            SweepRow(float(r), sol.threshold, target.threshold, float(r * sol.value_at(anchor)), beta)
        )
    targets = {"threshold": float(target.threshold), "value": beta}
    fixed["x0"] = anchor
    return _finish("discount", problem, params, rows, targets, fixed)


@dataclass(frozen=True)
class FunctionalLimitRow:
    param: float
    x: float
    k_ratio: float
    k_target: float
    l_ratio: float
    l_target: float

    @property
    def k_gap(self) -> float:
        return abs(self.k_ratio - self.k_target)

    @property
    def l_gap(self) -> float:
        return abs(self.l_ratio - self.l_target)


@dataclass(frozen=True)
class FunctionalLimitReport:
    axis: str
    rows: tuple[FunctionalLimitRow, ...]
    non_monotone: tuple[tuple[float, str], ...]

    def gaps(self, x: float, which: str) -> tuple[float, ...]:
        attr = "k_gap" if which == "K" else "l_gap"
        return tuple(getattr(row, attr) for row in self.rows if row.x == x)

    def to_csv(self) -> str:
        lines = ["axis,param,x,k_ratio,k_target,k_gap,l_ratio,l_target,l_gap"]
        for row in self.rows:
            lines.append(
                ",".join(
                    [
                        self.axis,
                        _fmt(row.param),
                        _fmt(row.x),
                        _fmt(row.k_ratio),
                        _fmt(row.k_target),
                        _fmt(row.k_gap),
                        _fmt(row.l_ratio),
                        _fmt(row.l_target),
                        _fmt(row.l_gap),
                    ]
                )
            )
        return "\n".join(lines) + "\n"


def functional_limit_report(
    spec: ProblemSpec,
    x_grid: Sequence[float],
    grid: Sequence[float],
    axis: str = "lambda",
    r: float = 1.0,
    cfg: QuadratureConfig = SOLVER_CONFIG,
) -> FunctionalLimitReport:
    """Normalized one-sided functionals against their limiting values.

    axis="lambda": Khat/L hat of theta_r at rate r+lam, divided by r+lam,
    which vanish as lam grows.  axis="discount": Khat/Lhat at rate r,
    divided by r, which converge to the one-sided averages H_low/H_up of
    the compensated cost as r drops to 0 (recurrent models only).
    """
    if axis not in ("lambda", "discount"):
        raise PreconditionError(f"axis must be 'lambda' or 'discount', got {axis!r}")
    increasing = axis == "lambda"
    params = _validate_grid(grid, increasing=increasing, minimum=2)
    if np.any(params <= 0):
        raise PreconditionError("grid must be positive")
    xs = np.asarray(list(x_grid), dtype=float)
    if xs.size == 0:
        raise PreconditionError("x grid is empty")
    model = spec.model
    kinks = spec.cost.kinks
    if axis == "discount":
        rec = recurrence_check(model)
        if not rec.passed:
            raise PreconditionError(
                f"discount limits need a recurrent model: {rec.detail}"
            )
        pim = spec.pi_mu()

    rows: list[FunctionalLimitRow] = []
    for param in params:
        if axis == "lambda":
            s = r + float(param)
            f = spec.theta(r)
            for x in xs:
                k = functional_K(model, s, f, float(x), cfg=cfg, kinks=kinks) / s
                lv = functional_L(model, s, f, float(x), cfg=cfg, kinks=kinks) / s
                rows.append(FunctionalLimitRow(float(param), float(x), k, 0.0, lv, 0.0))
        else:
            s = float(param)
            f = spec.theta(s)
            for x in xs:
                k = functional_K(model, s, f, float(x), cfg=cfg, kinks=kinks) / s
                lv = functional_L(model, s, f, float(x), cfg=cfg, kinks=kinks) / s
                hk = functional_H(model, pim, float(x), "lower", cfg, kinks)
                hl = functional_H(model, pim, float(x), "upper", cfg, kinks)
                rows.append(FunctionalLimitRow(s, float(x), k, hk, lv, hl))

    bad: list[tuple[float, str]] = []
    for x in xs:
        for which in ("K", "L"):
            attr = "k_gap" if which == "K" else "l_gap"
            seq = [getattr(row, attr) for row in rows if row.x == float(x)]
            if not all(b < a for a, b in zip(seq, seq[1:])):
                bad.append((float(x), which))
    report = FunctionalLimitReport(axis, tuple(rows), tuple(bad))
    for x, which in bad:
        warnings.warn(
            f"{which} limit residual not monotone at x={x:g} ({axis} grid)",
            stacklevel=2,
        )
    return report


@dataclass(frozen=True)
class FellerRow:
    lam: float
    sup_residual: float
    worst_x: float


@dataclass(frozen=True)
class FellerReport:
    rows: tuple[FellerRow, ...]
    decreasing: bool
    order_estimate: float | None

    def to_csv(self) -> str:
        lines = ["lam,sup_residual,worst_x"]
        for row in self.rows:
            lines.append(
                ",".join([_fmt(row.lam), _fmt(row.sup_residual), _fmt(row.worst_x)])
            )
        return "\n".join(lines) + "\n"


def feller_approx_report(
    spec: ProblemSpec,
    lambda_grid: Sequence[float],
    x_grid: Sequence[float],
    r: float = 1.0,
    cfg: QuadratureConfig = SOLVER_CONFIG,
) -> FellerReport:
    """sup_x |lam * (R_{r+lam} theta_r)(x) - theta_r(x)| per lam.

    The resolvent scaled by its rate tends to the identity on continuous
    functions; the sup over the probe grid must shrink as lam grows.
    """
    params = _validate_grid(lambda_grid, increasing=True, minimum=2)
    if np.any(params <= 0):
        raise PreconditionError("lambda grid must be positive")
    xs = np.asarray(list(x_grid), dtype=float)
    if xs.size == 0:
        raise PreconditionError("x grid is empty")
    if r <= 0:
        raise PreconditionError(f"discount rate must be positive, got {r!r}")
    model = spec.model
    kinks = spec.cost.kinks
    f = spec.theta(r)

    rows: list[FellerRow] = []
    for lam in params:
        s = r + float(lam)
        residuals = np.array(
            [
                abs(lam * resolvent(model, s, f, float(x), cfg=cfg, kinks=kinks) - f(float(x)))
                for x in xs
            ]
        )
        worst = int(np.argmax(residuals))
        rows.append(FellerRow(float(lam), float(residuals[worst]), float(xs[worst])))

    sups = [row.sup_residual for row in rows]
    decreasing = all(b < a for a, b in zip(sups, sups[1:]))
    orders = _order_estimates(params, sups, "lambda")
    finite = [p for p in orders if p is not None]
    return FellerReport(tuple(rows), decreasing, finite[-1] if finite else None)
