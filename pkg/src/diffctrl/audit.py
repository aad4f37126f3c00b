"""Structural precondition checks run before solving.

The threshold characterizations assume a yield that decreases, bottoms
out at an interior point, and then grows toward the upper boundary, plus
enough integrability for the one-sided functionals to exist.  These are
assumptions about user-supplied data, so each solver runs (or the CLI
exposes) an audit that probes them numerically and reports what it found.
The minimizer located here doubles as the seed for root bracketing.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import DivergenceError, NumericError, PreconditionError
from .functionals import _bounds, functional_H, functional_L, resolvent, speed_mass
from .problems import ProblemSpec
from .quadrature import SOLVER_CONFIG, QuadratureConfig

__all__ = [
    "AuditCheck",
    "AuditReport",
    "audit_discounted",
    "audit_ergodic",
    "recurrence_check",
]


@dataclass(frozen=True)
class AuditCheck:
    name: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class AuditReport:
    problem: str
    checks: tuple[AuditCheck, ...]
    x_star: float | None
    probe_interval: tuple[float, float] | None

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def summary(self) -> str:
        lines = [f"audit: {self.problem}"]
        for c in self.checks:
            mark = "ok  " if c.passed else "FAIL"
            lines.append(f"  [{mark}] {c.name}: {c.detail}")
        return "\n".join(lines)

    def raise_if_failed(self) -> None:
        if not self.passed:
            bad = "; ".join(
                f"{c.name} ({c.detail})" for c in self.checks if not c.passed
            )
            raise PreconditionError(f"{self.problem}: {bad}")

    def to_dict(self) -> dict:
        return {
            "problem": self.problem,
            "passed": self.passed,
            "x_star": self.x_star,
            "probe_interval": list(self.probe_interval)
            if self.probe_interval
            else None,
            "checks": [
                {"name": c.name, "passed": c.passed, "detail": c.detail}
                for c in self.checks
            ],
        }


def _probe_shape(
    fn: Callable[[np.ndarray], np.ndarray],
    model,
    max_doublings: int = 50,
) -> tuple[float | None, tuple[float, float], bool, bool, float | None]:
    """Expand from the reference point until fn has risen on both sides.

    Returns (x_star, (left_edge, right_edge), rose_left, rose_right,
    switch_violation), where switch_violation is the location of a
    decrease occurring after an increase on the probe grid (None if the
    profile is decreasing-then-increasing up to noise)."""
    eff_lo, eff_hi, _, _ = _bounds(model)
    x0 = float(model.x_ref)

    def val(x: float) -> float:
        v = float(fn(np.asarray(x, dtype=float)))
        if not np.isfinite(v):
            raise NumericError(f"yield evaluated to {v!r} at x={x:.6g}")
        return v

    f0 = val(x0)

    def expand(direction: float) -> tuple[float, bool]:
        h = 0.5 * max(1.0, abs(x0))
        edge, best = x0, f0
        limit = eff_hi if direction > 0 else eff_lo
        for _ in range(max_doublings):
            cand = x0 + direction * h
            if direction > 0:
                cand = min(cand, limit)
            else:
                cand = max(cand, limit)
            fcand = val(cand)
            best = min(best, fcand)
            edge = cand
            if fcand > best + 1e-6 * (1.0 + abs(best)):
                return edge, True
            if cand == limit:
                return edge, False
            h *= 2.0
        return edge, False

    right_edge, rose_right = expand(+1.0)
    left_edge, rose_left = expand(-1.0)

    grid = np.linspace(left_edge, right_edge, 241)
    vals = np.array([val(g) for g in grid])
    tol = 1e-9 * (vals.max() - vals.min() + 1e-300)
    d = np.diff(vals)
    rising = np.where(d > tol)[0]
    falling = np.where(d < -tol)[0]
    violation = None
    if rising.size and falling.size and falling.max() > rising.min():
        # a decrease after an increase: not decreasing-then-increasing
        bad = falling[falling > rising.min()][0]
        violation = float(grid[bad])

    x_star = None
    k = int(np.argmin(vals))
    if 0 < k < len(grid) - 1:
        res = minimize_scalar(
            lambda t: val(float(t)),
            bounds=(grid[k - 1], grid[k + 1]),
            method="bounded",
            options={"xatol": 1e-9 * max(1.0, abs(grid[k]))},
        )
        x_star = float(res.x)
    return x_star, (left_edge, right_edge), rose_left, rose_right, violation


def _shape_checks(
    fn, model, label: str
) -> tuple[list[AuditCheck], float | None, tuple[float, float]]:
    checks: list[AuditCheck] = []
    try:
        x_star, probe, rose_l, rose_r, violation = _probe_shape(fn, model)
    except NumericError as e:
        checks.append(AuditCheck(f"{label} finite", False, str(e)))
        return checks, None, (np.nan, np.nan)
    checks.append(
        AuditCheck(
            f"{label} has interior minimum",
            x_star is not None and rose_r,
            f"minimizer near {x_star:.6g} in [{probe[0]:.6g}, {probe[1]:.6g}]"
            if x_star is not None
            else f"no interior minimum located in [{probe[0]:.6g}, {probe[1]:.6g}]",
        )
    )
    checks.append(
        AuditCheck(
            f"{label} grows toward upper boundary",
            rose_r,
            "rise detected past the minimum"
            if rose_r
            else f"no growth detected up to {probe[1]:.6g}",
        )
    )
    checks.append(
        AuditCheck(
            f"{label} decreasing-then-increasing",
            violation is None,
            "single trough on probe grid"
            if violation is None
            else f"decrease after increase near x={violation:.6g}",
        )
    )
    return checks, x_star, probe


def recurrence_check(model) -> AuditCheck:
    """Decide whether the uncontrolled diffusion is recurrent.

    Recurrence on (l, u) is equivalent to the scale function diverging at
    both ends, i.e. S' = exp(-int 2 mu/sigma^2) not integrable there, which
    for the drifts in scope reduces to the drift pointing inward (or
    vanishing) near each edge.  Models that know their classification in
    closed form short-circuit the probe.
    """
    if model.recurrent is not None:
        verdict = "recurrent" if model.recurrent else "transient"
        return AuditCheck(
            "model recurrence", model.recurrent, f"{verdict} (closed form)"
        )
    lo, hi, _, _ = _bounds(model)
    width = hi - lo
    # outer 5% of the working interval on each side
    left = np.linspace(lo + 1e-3 * width, lo + 0.05 * width, 3)
    right = np.linspace(hi - 0.05 * width, hi - 1e-3 * width, 3)
    inward_low = bool(np.all(model.drift(left) >= -1e-12))
    inward_high = bool(np.all(model.drift(right) <= 1e-12))
    ok = inward_low and inward_high
    detail = (
        f"drift sign probe near edges of ({lo:g}, {hi:g}): "
        f"lower {'inward' if inward_low else 'outward'}, "
        f"upper {'inward' if inward_high else 'outward'}"
    )
    return AuditCheck("model recurrence", ok, detail)


def _try_integral(name: str, thunk: Callable[[], float]) -> AuditCheck:
    try:
        # overflow in a probe is a finding, not a warning
        with np.errstate(over="ignore", invalid="ignore"):
            v = thunk()
    except (DivergenceError, NumericError) as e:
        return AuditCheck(name, False, str(e))
    if not np.isfinite(v):
        return AuditCheck(name, False, f"evaluated to {v!r}")
    return AuditCheck(name, True, f"converged ({v:.6g})")


def audit_discounted(
    spec: ProblemSpec,
    r: float,
    lam: float | None = None,
    cfg: QuadratureConfig = SOLVER_CONFIG,
) -> AuditReport:
    """Preconditions for the discounted problems (push rate optional)."""
    label = "constrained-discounted" if lam is not None else "singular-discounted"
    checks: list[AuditCheck] = []
    model = spec.model
    if r <= 0:
        checks.append(AuditCheck("discount rate positive", False, f"r={r!r}"))
        return AuditReport(label, tuple(checks), None, None)
    if lam is not None and lam <= 0:
        checks.append(AuditCheck("push rate positive", False, f"lam={lam!r}"))
        return AuditReport(label, tuple(checks), None, None)
    theta = spec.theta(r)
    shape, x_star, probe = _shape_checks(theta, model, "discounted yield")
    checks.extend(shape)
    if x_star is not None:
        kinks = spec.cost.kinks
        checks.append(
            _try_integral(
                "resolvent of yield converges",
                lambda: resolvent(model, r, theta, x_star, 0, cfg, kinks),
            )
        )
        if lam is not None:
            checks.append(
                _try_integral(
                    "high-rate resolvent converges",
                    lambda: resolvent(model, r + lam, theta, x_star, 0, cfg, kinks),
                )
            )
    return AuditReport(label, tuple(checks), x_star, probe)


def audit_ergodic(
    spec: ProblemSpec,
    lam: float | None = None,
    cfg: QuadratureConfig = SOLVER_CONFIG,
) -> AuditReport:
    """Preconditions for the long-run average problems."""
    label = "constrained-ergodic" if lam is not None else "singular-ergodic"
    checks: list[AuditCheck] = []
    model = spec.model
    if lam is not None and lam <= 0:
        checks.append(AuditCheck("push rate positive", False, f"lam={lam!r}"))
        return AuditReport(label, tuple(checks), None, None)
    pim = spec.pi_mu()
    shape, x_star, probe = _shape_checks(pim, model, "compensated cost")
    checks.extend(shape)
    if x_star is not None:
        kinks = spec.cost.kinks
        checks.append(
            _try_integral(
                "speed measure finite below",
                lambda: speed_mass(model, None, x_star, cfg),
            )
        )
        checks.append(
            _try_integral(
                "lower cost integral converges",
                lambda: functional_H(model, pim, x_star, "lower", cfg, kinks),
            )
        )
        if lam is not None:
            checks.append(
                _try_integral(
                    "upper opportunity-rate integral converges",
                    lambda: functional_L(
                        model, lam, pim, x_star, "centered", cfg, kinks
                    ),
                )
            )
    if model.recurrent is False and lam is None:
        # pushes supply the downward force; what matters is finite speed
        # mass below, checked above. Record the classification anyway.
        checks.append(
            AuditCheck(
                "model recurrence",
                True,
                "uncontrolled process is transient; barrier policy "
                "relies on finite speed mass below the threshold",
            )
        )
    return AuditReport(label, tuple(checks), x_star, probe)
