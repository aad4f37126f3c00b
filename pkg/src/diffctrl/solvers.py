"""Threshold solvers for the four push-control problems.

Problems
--------
singular-discounted    push any amount instantly, discounted cost
constrained-discounted push only at Poisson opportunity times
singular-ergodic       long-run average, instant pushes
constrained-ergodic    long-run average, Poisson opportunities

Each solver locates the optimal threshold as the root of a scalar
condition built from the one-sided functionals, assembles the value
function (discounted) or the average cost plus bias function (ergodic),
and records cross-checks: continuity of the value across the threshold,
smoothness of the fit, and for ergodic problems the average cost computed
two independent ways.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .audit import AuditReport, audit_discounted, audit_ergodic
from .functionals import (
    _bounds,
    functional_H,
    functional_K,
    functional_L,
    resolvent,
    resolvent_leg,
    resolvent_with_derivatives,
    speed_mass,
)
from .fundamental import cumulative_interpolant
from .problems import ProblemSpec
from .quadrature import SOLVER_CONFIG, QuadratureConfig, integrate_lower
from .roots import solve_root

__all__ = [
    "Solution",
    "solve_singular_discounted",
    "solve_constrained_discounted",
    "solve_singular_ergodic",
    "solve_constrained_ergodic",
]

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class Solution:
    """Solved threshold problem.

    value is the discounted value function, or for ergodic problems the
    bias (relative value) normalized to zero at the threshold.  The
    continuity and smooth-fit gaps are measured diagnostics where the
    construction leaves something to check; gaps that vanish identically
    by construction are reported as 0.
    """

    problem: str
    threshold: float
    gamma: float
    r: float | None
    lam: float | None
    beta: float | None
    beta_alt: float | None
    x_star: float
    root_residual: float
    bracket: tuple[float, float]
    continuity_gap: float
    smooth_fit_gap: float
    spec_info: dict = field(repr=False)
    diagnostics: dict = field(repr=False)
    value: Callable[[float], float] = field(repr=False, compare=False)
    audit: AuditReport = field(repr=False, compare=False)

    def value_at(self, x) -> np.ndarray | float:
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.array([self.value(float(t)) for t in xs], dtype=float)
        return float(out[0]) if np.ndim(x) == 0 else out

    def to_dict(self, grid=None) -> dict:
        d = {
            "schema_version": SCHEMA_VERSION,
            "problem": self.problem,
            "threshold": self.threshold,
            "gamma": self.gamma,
            "r": self.r,
            "lam": self.lam,
            "beta": self.beta,
            "beta_alt": self.beta_alt,
            "x_star": self.x_star,
            "root_residual": self.root_residual,
            "bracket": list(self.bracket),
            "continuity_gap": self.continuity_gap,
            "smooth_fit_gap": self.smooth_fit_gap,
            "spec": self.spec_info,
            "diagnostics": self.diagnostics,
            "audit": self.audit.to_dict() if self.audit is not None else None,
        }
        if grid is not None:
            xs = np.asarray(grid, dtype=float)
            d["grid"] = xs.tolist()
            d["values"] = [self.value(float(t)) for t in xs]
        return d


def _root_kwargs(seed: float, model, root_tol: float, scan: int) -> dict:
    eff_lo, eff_hi, _, _ = _bounds(model)
    scale = max(1.0, abs(seed))
    return dict(
        seed=seed,
        step=0.25 * scale,
        xtol=root_tol * scale,
        lo_limit=eff_lo,
        hi_limit=eff_hi,
        scan=scan,
    )


def _base_diagnostics(rr, cfg: QuadratureConfig, root_tol: float) -> dict:
    return {
        "root_evaluations": rr.evaluations,
        "unique_in_bracket": rr.unique_in_bracket,
        "quad_abs_tol": cfg.abs_tol,
        "quad_rel_tol": cfg.rel_tol,
        "root_tol": root_tol,
    }


def solve_singular_discounted(
    spec: ProblemSpec,
    r: float,
    cfg: QuadratureConfig = SOLVER_CONFIG,
    root_tol: float = 1e-12,
    run_audit: bool = True,
    scan: int = 21,
) -> Solution:
    """Instant pushes, discount rate r.

    Threshold y* is the root of Khat_theta^r(y) / r = 0; below y* the
    value is gamma x + R_r theta(x) - c psi_r(x), above it the push takes
    effect immediately and V(x) = gamma x + theta(y*)/r.
    """
    model, gamma = spec.model, spec.gamma
    report = audit_discounted(spec, r, None, cfg)
    if run_audit:
        report.raise_if_failed()
    if report.x_star is None:
        report.raise_if_failed()
    theta = spec.theta(r)
    kinks = spec.cost.kinks
    pair = model.fundamental_pair(r)

    def cond(y: float) -> float:
        return functional_K(model, r, theta, y, "centered", cfg, kinks, pair) / r

    rr = solve_root(cond, **_root_kwargs(report.x_star, model, root_tol, scan))
    y = rr.root

    r0, r1, r2 = resolvent_with_derivatives(model, r, theta, y, cfg, kinks, pair)
    c1 = r1 / float(pair.dlogpsi(y))
    lpsi_y = float(pair.logpsi(y))
    a_const = float(theta(np.asarray(y))) / r
    continuity_gap = abs((r0 - c1) - a_const) / max(1.0, abs(a_const))
    smooth_fit_gap = abs(r2 - float(pair.psi_curvature(y)) * c1) / max(1.0, abs(r2))

    def value(x: float) -> float:
        x = float(x)
        if x >= y:
            return gamma * x + a_const
        rx = resolvent(model, r, theta, x, 0, cfg, kinks, pair)
        return gamma * x + rx - math.exp(float(pair.logpsi(x)) - lpsi_y) * c1

    return Solution(
        problem="singular-discounted",
        threshold=y,
        gamma=gamma,
        r=r,
        lam=None,
        beta=None,
        beta_alt=None,
        x_star=report.x_star,
        root_residual=rr.residual,
        bracket=rr.bracket,
        continuity_gap=continuity_gap,
        smooth_fit_gap=smooth_fit_gap,
        spec_info=spec.describe(),
        diagnostics=_base_diagnostics(rr, cfg, root_tol)
        | {"threshold_constant": a_const},
        value=value,
        audit=report,
    )


def solve_constrained_discounted(
    spec: ProblemSpec,
    r: float,
    lam: float,
    cfg: QuadratureConfig = SOLVER_CONFIG,
    root_tol: float = 1e-12,
    run_audit: bool = True,
    scan: int = 21,
) -> Solution:
    """Pushes only at Poisson(lam) opportunity times, discount rate r.

    Threshold y* solves

        Lhat_theta^{r+lam}(y) + (dlogphi_{r+lam}(y) / dlogpsi_r(y))
                                 * Khat_theta^r(y) = 0,

    and the value has a lower branch driven by R_r theta and an upper
    branch driven by R_{r+lam} theta.
    """
    model, gamma = spec.model, spec.gamma
    report = audit_discounted(spec, r, lam, cfg)
    if run_audit:
        report.raise_if_failed()
    if report.x_star is None:
        report.raise_if_failed()
    theta = spec.theta(r)
    kinks = spec.cost.kinks
    pair_r = model.fundamental_pair(r)
    pair_rl = model.fundamental_pair(r + lam)

    def cond(y: float) -> float:
        lv = functional_L(model, r + lam, theta, y, "centered", cfg, kinks, pair_rl)
        kv = functional_K(model, r, theta, y, "centered", cfg, kinks, pair_r)
        ratio = float(pair_rl.dlogphi(y)) / float(pair_r.dlogpsi(y))
        return (lv + ratio * kv) / (r + lam)

    rr = solve_root(cond, **_root_kwargs(report.x_star, model, root_tol, scan))
    y = rr.root

    r0_lo, r1_lo, r2_lo = resolvent_with_derivatives(
        model, r, theta, y, cfg, kinks, pair_r
    )
    r0_hi, r1_hi, r2_hi = resolvent_with_derivatives(
        model, r + lam, theta, y, cfg, kinks, pair_rl
    )
    c_lo = r1_lo / float(pair_r.dlogpsi(y))
    c_hi = r1_hi / float(pair_rl.dlogphi(y))
    a_up = (lam / r) * (r0_hi - c_hi)
    v_lo = r0_lo - c_lo
    v_hi = r0_hi - c_hi + a_up
    continuity_gap = abs(v_lo - v_hi) / max(1.0, abs(v_lo))
    fit_lo = r2_lo - float(pair_r.psi_curvature(y)) * c_lo
    fit_hi = r2_hi - float(pair_rl.phi_curvature(y)) * c_hi
    smooth_fit_gap = abs(fit_lo - fit_hi) / max(1.0, abs(fit_lo), abs(fit_hi))
    lpsi_y = float(pair_r.logpsi(y))
    lphi_y = float(pair_rl.logphi(y))

    def value(x: float) -> float:
        x = float(x)
        if x < y:
            rx = resolvent(model, r, theta, x, 0, cfg, kinks, pair_r)
            return gamma * x + rx - math.exp(float(pair_r.logpsi(x)) - lpsi_y) * c_lo
        rx = resolvent(model, r + lam, theta, x, 0, cfg, kinks, pair_rl)
        return (
            gamma * x
            + rx
            - math.exp(float(pair_rl.logphi(x)) - lphi_y) * c_hi
            + a_up
        )

    return Solution(
        problem="constrained-discounted",
        threshold=y,
        gamma=gamma,
        r=r,
        lam=lam,
        beta=None,
        beta_alt=None,
        x_star=report.x_star,
        root_residual=rr.residual,
        bracket=rr.bracket,
        continuity_gap=continuity_gap,
        smooth_fit_gap=smooth_fit_gap,
        spec_info=spec.describe(),
        diagnostics=_base_diagnostics(rr, cfg, root_tol)
        | {"upper_constant": a_up, "lower_coefficient": c_lo, "upper_coefficient": c_hi},
        value=value,
        audit=report,
    )


def _signed_exp(log_factor: float, amount: float) -> float:
    """sign(amount) * exp(log_factor + log|amount|), 0 when amount is 0."""
    if amount == 0.0:
        return 0.0
    return math.copysign(math.exp(log_factor + math.log(abs(amount))), amount)


def _lower_bias(
    spec: ProblemSpec,
    beta: float,
    b: float,
    cfg: QuadratureConfig,
) -> tuple[Callable[[float], float], Callable[[float], float]]:
    """Bias derivative and lazily built bias below the threshold b.

    On (l, b) the bias solves A w = beta - pi with w'/S' -> 0 at l, so

        w'(t) = S'(t) int_l^t (beta - pi(z)) m'(z) dz,

    computed per point with the product taken in log space, and w itself
    (normalized to w(b) = 0) integrated from b with a dense interpolant
    that extends automatically when queried further left.
    """
    model, pi = spec.model, spec.cost
    kinks = spec.cost.kinks
    eff_lo, _, lo_trunc, _ = _bounds(model)

    def centered_mass(t: float) -> float:
        def g(z: np.ndarray) -> np.ndarray:
            return np.exp(model.log_speed_density(z)) * (beta - pi(z))

        return integrate_lower(g, t, a=eff_lo, cfg=cfg, kinks=kinks, truncated=lo_trunc)

    def wprime(t: float) -> float:
        return _signed_exp(float(model.log_scale_density(t)), centered_mass(t))

    def wprime_vec(ts: np.ndarray) -> np.ndarray:
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        return np.array([wprime(t) for t in ts])

    state: dict = {"lo": b, "interp": None}

    def bias(x: float) -> float:
        x = float(x)
        if x == b:
            return 0.0
        if x < state["lo"] or state["interp"] is None:
            new_lo = max(eff_lo, x - 0.5 * max(1.0, abs(x)))
            state["lo"] = new_lo
            state["interp"] = cumulative_interpolant(wprime_vec, b, (new_lo, b))
        return float(state["interp"](np.asarray([x]))[0])

    return wprime, bias


def solve_singular_ergodic(
    spec: ProblemSpec,
    cfg: QuadratureConfig = SOLVER_CONFIG,
    root_tol: float = 1e-12,
    run_audit: bool = True,
    scan: int = 21,
) -> Solution:
    """Instant pushes, long-run average cost.

    Threshold b* is the root of H_low(b) = int_l^b (pi_mu(z) - pi_mu(b))
    m'(z) dz; the average cost is the speed-measure mean of pi_mu below
    b*, which at the root also equals pi_mu(b*) (reported as beta_alt).
    """
    model, gamma = spec.model, spec.gamma
    report = audit_ergodic(spec, None, cfg)
    if run_audit:
        report.raise_if_failed()
    if report.x_star is None:
        report.raise_if_failed()
    pim = spec.pi_mu()
    kinks = spec.cost.kinks
    eff_lo, _, lo_trunc, _ = _bounds(model)
    m_ref = speed_mass(model, None, report.x_star, cfg)

    def cond(b: float) -> float:
        return functional_H(model, pim, b, "lower", cfg, kinks) / m_ref

    rr = solve_root(cond, **_root_kwargs(report.x_star, model, root_tol, scan))
    b = rr.root

    mass = speed_mass(model, None, b, cfg)

    def g_num(z: np.ndarray) -> np.ndarray:
        return np.exp(model.log_speed_density(z)) * pim(z)

    num = integrate_lower(g_num, b, a=eff_lo, cfg=cfg, kinks=kinks, truncated=lo_trunc)
    beta = num / mass
    beta_alt = float(pim(np.asarray(b)))

    wprime, bias = _lower_bias(spec, beta, b, cfg)
    smooth_fit_gap = abs(wprime(b) - gamma) / gamma

    def value(x: float) -> float:
        x = float(x)
        if x >= b:
            return gamma * (x - b)
        return bias(x)

    return Solution(
        problem="singular-ergodic",
        threshold=b,
        gamma=gamma,
        r=None,
        lam=None,
        beta=beta,
        beta_alt=beta_alt,
        x_star=report.x_star,
        root_residual=rr.residual,
        bracket=rr.bracket,
        continuity_gap=0.0,
        smooth_fit_gap=smooth_fit_gap,
        spec_info=spec.describe(),
        diagnostics=_base_diagnostics(rr, cfg, root_tol)
        | {"speed_mass_below": mass, "beta_gap": abs(beta - beta_alt) / max(1.0, abs(beta))},
        value=value,
        audit=report,
    )


def solve_constrained_ergodic(
    spec: ProblemSpec,
    lam: float,
    cfg: QuadratureConfig = SOLVER_CONFIG,
    root_tol: float = 1e-12,
    run_audit: bool = True,
    scan: int = 21,
) -> Solution:
    """Poisson(lam) opportunities, long-run average cost.

    Threshold b* solves

        S'(b) m(l,b) Lhat_{pi_mu}^{lam}(b) + dlogphi_lam(b) H_low(b) = 0.

    beta is the speed-measure mean of pi_mu below b*; beta_alt recomputes
    it from the upper branch as -lam S'(b*) Ihat / dlogphi_lam(b*) with
    Ihat the anchored upper resolvent leg of pi_mu, equal at the root.
    """
    model, gamma = spec.model, spec.gamma
    report = audit_ergodic(spec, lam, cfg)
    if run_audit:
        report.raise_if_failed()
    if report.x_star is None:
        report.raise_if_failed()
    pim = spec.pi_mu()
    pi = spec.cost
    kinks = spec.cost.kinks
    eff_lo, _, lo_trunc, _ = _bounds(model)
    pair = model.fundamental_pair(lam)

    def cond(b: float) -> float:
        lv = functional_L(model, lam, pim, b, "centered", cfg, kinks, pair)
        hv = functional_H(model, pim, b, "lower", cfg, kinks)
        mass_b = speed_mass(model, None, b, cfg)
        return (
            _signed_exp(float(model.log_scale_density(b)), mass_b * lv)
            + float(pair.dlogphi(b)) * hv
        ) / lam

    rr = solve_root(cond, **_root_kwargs(report.x_star, model, root_tol, scan))
    b = rr.root

    mass = speed_mass(model, None, b, cfg)

    def g_num(z: np.ndarray) -> np.ndarray:
        return np.exp(model.log_speed_density(z)) * pim(z)

    num = integrate_lower(g_num, b, a=eff_lo, cfg=cfg, kinks=kinks, truncated=lo_trunc)
    beta = num / mass
    ihat = resolvent_leg(model, lam, pim, b, "upper", cfg, kinks, pair)
    beta_alt = -lam * _signed_exp(
        float(model.log_scale_density(b)), ihat
    ) / float(pair.dlogphi(b))

    def q(z: np.ndarray) -> np.ndarray:
        return pi(z) + lam * gamma * (z - b) - beta

    rq_b, rq1_b, _ = resolvent_with_derivatives(model, lam, q, b, cfg, kinks, pair)
    lphi_b = float(pair.logphi(b))
    dphi_b = float(pair.dlogphi(b))

    wprime, bias = _lower_bias(spec, beta, b, cfg)
    w_up_prime = rq1_b - dphi_b * rq_b
    smooth_fit_gap = abs(wprime(b) - w_up_prime) / max(gamma, abs(w_up_prime))

    def value(x: float) -> float:
        x = float(x)
        if x < b:
            return bias(x)
        if x == b:
            return 0.0
        rx = resolvent(model, lam, q, x, 0, cfg, kinks, pair)
        return rx - math.exp(float(pair.logphi(x)) - lphi_b) * rq_b

    return Solution(
        problem="constrained-ergodic",
        threshold=b,
        gamma=gamma,
        r=None,
        lam=lam,
        beta=beta,
        beta_alt=beta_alt,
        x_star=report.x_star,
        root_residual=rr.residual,
        bracket=rr.bracket,
        continuity_gap=0.0,
        smooth_fit_gap=smooth_fit_gap,
        spec_info=spec.describe(),
        diagnostics=_base_diagnostics(rr, cfg, root_tol)
        | {
            "speed_mass_below": mass,
            "beta_gap": abs(beta - beta_alt) / max(1.0, abs(beta)),
        },
        value=value,
        audit=report,
    )
