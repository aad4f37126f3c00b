"""Resolvents and one-sided functionals of a diffusion, in ratio form.

Every quantity here is assembled from log-space fundamental solutions, so
the only exponentials taken are of differences like log psi(y) - log psi(x)
that are nonpositive along their integration leg.  This keeps rates in the
hundreds (large-rate sweeps) inside double precision without any rescaling.

Conventions:

* ``resolvent`` returns R_s f(x) = E_x int_0^inf e^{-st} f(X_t) dt and its
  first two derivatives; the second derivative comes from the ODE
  s R - mu R' - (sigma^2 / 2) R'' = f rather than from differentiating
  quadratures.
* ``functional_K`` / ``functional_L`` return the normalized one-sided
  functionals

      Khat_f^s(x) = s int_l^x (psi(y)/psi(x)) f(y) m'(y) dy
                    - (psi'/psi)(x) f(x) / S'(x),
      Lhat_f^s(x) = s int_x^u (phi(y)/phi(x)) f(y) m'(y) dy
                    + (phi'/phi)(x) f(x) / S'(x),

  i.e. the classical K and L divided by psi(x) and phi(x).  Division by
  the fundamental solution is what makes them finite for all rates; root
  conditions only ever use ratios or signs of K and L, so nothing is lost.
* ``functional_H`` returns the zero-rate analogues built from the speed
  measure alone,

      H_low(x) = int_l^x (f(z) - f(x)) m'(z) dz,
      H_up(x)  = int_x^u (f(z) - f(x)) m'(z) dz.

All evaluation points are scalars; sweeps should loop.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .errors import NumericError
from .fundamental import FundamentalPair
from .models import DiffusionModel
from .quadrature import (
    SOLVER_CONFIG,
    QuadratureConfig,
    integrate_lower,
    integrate_upper,
)

__all__ = [
    "resolvent",
    "resolvent_with_derivatives",
    "resolvent_leg",
    "functional_K",
    "functional_L",
    "functional_H",
    "speed_mass",
    "mass_identity_residuals",
    "resolvent_identity_residuals",
    "feller_gap",
]

Func = Callable[[np.ndarray], np.ndarray]


def _bounds(model: DiffusionModel) -> tuple[float, float, bool, bool]:
    """Effective integration bounds and whether each is a working-interval
    truncation of an infinite boundary (in which case decay is enforced)."""
    span_lo, span_hi = model.span
    lo = model.lower
    if span_lo > lo:
        eff_lo, lo_trunc = span_lo, True
    else:
        eff_lo, lo_trunc = lo, False
    if np.isfinite(span_hi):
        eff_hi, hi_trunc = span_hi, True
    else:
        eff_hi, hi_trunc = np.inf, False
    return eff_lo, eff_hi, lo_trunc, hi_trunc


def _leg_lower(
    pair: FundamentalPair,
    f: Func | None,
    x: float,
    cfg: QuadratureConfig,
    kinks: Sequence[float],
    shift: float = 0.0,
) -> float:
    """int_l^x exp(log psi(y) - log psi(x)) (f(y) - shift) m'(y) dy."""
    model = pair.model
    anchor = float(pair.logpsi(x))

    def g(y: np.ndarray) -> np.ndarray:
        expo = pair.logpsi(y) - anchor + model.log_speed_density(y)
        base = np.exp(expo)
        if f is None:
            return base if shift == 0.0 else base * (1.0 - shift)
        return base * (f(y) - shift)

    eff_lo, _, lo_trunc, _ = _bounds(model)
    if x <= eff_lo:
        return 0.0
    return integrate_lower(g, x, a=eff_lo, cfg=cfg, kinks=kinks, truncated=lo_trunc)


def _leg_upper(
    pair: FundamentalPair,
    f: Func | None,
    x: float,
    cfg: QuadratureConfig,
    kinks: Sequence[float],
    shift: float = 0.0,
) -> float:
    """int_x^u exp(log phi(y) - log phi(x)) (f(y) - shift) m'(y) dy."""
    model = pair.model
    anchor = float(pair.logphi(x))

    def g(y: np.ndarray) -> np.ndarray:
        expo = pair.logphi(y) - anchor + model.log_speed_density(y)
        base = np.exp(expo)
        if f is None:
            return base if shift == 0.0 else base * (1.0 - shift)
        return base * (f(y) - shift)

    _, eff_hi, _, hi_trunc = _bounds(model)
    if x >= eff_hi:
        return 0.0
    return integrate_upper(g, x, b=eff_hi, cfg=cfg, kinks=kinks, truncated=hi_trunc)


def resolvent_leg(
    model: DiffusionModel,
    s: float,
    f: Func | None,
    x: float,
    side: str = "lower",
    cfg: QuadratureConfig = SOLVER_CONFIG,
    kinks: Sequence[float] = (),
    pair: FundamentalPair | None = None,
) -> float:
    """One anchored leg of the resolvent kernel:

        lower: int_l^x (psi(y)/psi(x)) f(y) m'(y) dy
        upper: int_x^u (phi(y)/phi(x)) f(y) m'(y) dy

    f=None means f identically 1."""
    x = float(x)
    if pair is None:
        pair = model.fundamental_pair(s)
    if side == "lower":
        return _leg_lower(pair, f, x, cfg, kinks)
    if side == "upper":
        return _leg_upper(pair, f, x, cfg, kinks)
    raise ValueError(f"side must be 'lower' or 'upper', got {side!r}")


def resolvent_with_derivatives(
    model: DiffusionModel,
    s: float,
    f: Func,
    x: float,
    cfg: QuadratureConfig = SOLVER_CONFIG,
    kinks: Sequence[float] = (),
    pair: FundamentalPair | None = None,
) -> tuple[float, float, float]:
    """R_s f(x), (R_s f)'(x), (R_s f)''(x)."""
    x = float(x)
    if pair is None:
        pair = model.fundamental_pair(s)
    i_lo = _leg_lower(pair, f, x, cfg, kinks)
    i_hi = _leg_upper(pair, f, x, cfg, kinks)
    w = float(pair.wronskian_ratio(x))
    if not np.isfinite(w) or w <= 0.0:
        raise NumericError(f"degenerate wronskian {w!r} at x={x:.6g}")
    r0 = (i_lo + i_hi) / w
    r1 = (float(pair.dlogphi(x)) * i_lo + float(pair.dlogpsi(x)) * i_hi) / w
    sig2 = float(model.sigma(x)) ** 2
    r2 = 2.0 * (s * r0 - float(model.drift(x)) * r1 - float(f(np.asarray(x)))) / sig2
    return r0, r1, r2


def resolvent(
    model: DiffusionModel,
    s: float,
    f: Func,
    x: float,
    deriv: int = 0,
    cfg: QuadratureConfig = SOLVER_CONFIG,
    kinks: Sequence[float] = (),
    pair: FundamentalPair | None = None,
) -> float:
    if deriv not in (0, 1, 2):
        raise ValueError("deriv must be 0, 1 or 2")
    return resolvent_with_derivatives(model, s, f, x, cfg, kinks, pair)[deriv]


def functional_K(
    model: DiffusionModel,
    s: float,
    f: Func,
    x: float,
    representation: str = "centered",
    cfg: QuadratureConfig = SOLVER_CONFIG,
    kinks: Sequence[float] = (),
    pair: FundamentalPair | None = None,
) -> float:
    """Normalized lower functional Khat_f^s(x) (see module docstring).

    representation:
      "centered"   s * int (psi(y)/psi(x)) (f(y) - f(x)) m' dy; a single
                   integral with no cancellation, the solver default.
      "integral"   the two-term defining expression.
      "derivative" via R_s f and the ODE; independent of the other two.
    """
    x = float(x)
    if pair is None:
        pair = model.fundamental_pair(s)
    fx = float(f(np.asarray(x)))
    if representation == "centered":
        return s * _leg_lower(pair, f, x, cfg, kinks, shift=fx)
    if representation == "integral":
        boundary = float(pair.dlogpsi(x)) * fx * np.exp(-float(model.log_scale_density(x)))
        return s * _leg_lower(pair, f, x, cfg, kinks) - boundary
    if representation == "derivative":
        _, r1, r2 = resolvent_with_derivatives(model, s, f, x, cfg, kinks, pair)
        sig2 = float(model.sigma(x)) ** 2
        pref = 0.5 * sig2 * np.exp(-float(model.log_scale_density(x)))
        return pref * (float(pair.dlogpsi(x)) * r2 - float(pair.psi_curvature(x)) * r1)
    raise ValueError(f"unknown representation {representation!r}")


def functional_L(
    model: DiffusionModel,
    s: float,
    f: Func,
    x: float,
    representation: str = "centered",
    cfg: QuadratureConfig = SOLVER_CONFIG,
    kinks: Sequence[float] = (),
    pair: FundamentalPair | None = None,
) -> float:
    """Normalized upper functional Lhat_f^s(x); representations as in
    ``functional_K``."""
    x = float(x)
    if pair is None:
        pair = model.fundamental_pair(s)
    fx = float(f(np.asarray(x)))
    if representation == "centered":
        return s * _leg_upper(pair, f, x, cfg, kinks, shift=fx)
    if representation == "integral":
        boundary = float(pair.dlogphi(x)) * fx * np.exp(-float(model.log_scale_density(x)))
        return s * _leg_upper(pair, f, x, cfg, kinks) + boundary
    if representation == "derivative":
        _, r1, r2 = resolvent_with_derivatives(model, s, f, x, cfg, kinks, pair)
        sig2 = float(model.sigma(x)) ** 2
        pref = 0.5 * sig2 * np.exp(-float(model.log_scale_density(x)))
        return pref * (float(pair.phi_curvature(x)) * r1 - float(pair.dlogphi(x)) * r2)
    raise ValueError(f"unknown representation {representation!r}")


def functional_H(
    model: DiffusionModel,
    f: Func,
    x: float,
    side: str = "lower",
    cfg: QuadratureConfig = SOLVER_CONFIG,
    kinks: Sequence[float] = (),
) -> float:
    """Zero-rate one-sided functional of the speed measure."""
    x = float(x)
    fx = float(f(np.asarray(x)))

    def g(z: np.ndarray) -> np.ndarray:
        return np.exp(model.log_speed_density(z)) * (f(z) - fx)

    eff_lo, eff_hi, lo_trunc, hi_trunc = _bounds(model)
    if side == "lower":
        if x <= eff_lo:
            return 0.0
        return integrate_lower(g, x, a=eff_lo, cfg=cfg, kinks=kinks, truncated=lo_trunc)
    if side == "upper":
        if x >= eff_hi:
            return 0.0
        return integrate_upper(g, x, b=eff_hi, cfg=cfg, kinks=kinks, truncated=hi_trunc)
    raise ValueError(f"side must be 'lower' or 'upper', got {side!r}")


def speed_mass(
    model: DiffusionModel,
    a: float | None = None,
    b: float | None = None,
    cfg: QuadratureConfig = SOLVER_CONFIG,
) -> float:
    """int_a^b m'(z) dz, defaulting to the model's effective boundaries."""
    eff_lo, eff_hi, lo_trunc, hi_trunc = _bounds(model)

    def g(z: np.ndarray) -> np.ndarray:
        return np.exp(model.log_speed_density(z))

    lo = eff_lo if a is None else float(a)
    hi = eff_hi if b is None else float(b)
    if hi <= lo:
        return 0.0
    if np.isfinite(hi):
        return integrate_lower(
            g, hi, a=lo, cfg=cfg, truncated=lo_trunc and a is None
        )
    if not np.isfinite(lo):
        # both ends open: anchor the split at the reference point
        mid = float(model.x_ref)
        return speed_mass(model, a=lo, b=mid, cfg=cfg) + integrate_upper(
            g, mid, b=hi, cfg=cfg, truncated=hi_trunc and b is None
        )
    return integrate_upper(g, lo, b=hi, cfg=cfg, truncated=hi_trunc and b is None)


def mass_identity_residuals(
    model: DiffusionModel,
    s: float,
    x: float,
    cfg: QuadratureConfig = SOLVER_CONFIG,
    pair: FundamentalPair | None = None,
) -> dict[str, float]:
    """Relative residuals of the rate-s mass identities

        s int_l^x (psi(y)/psi(x)) m' dy = (psi'/psi)(x) / S'(x),
        s int_x^u (phi(y)/phi(x)) m' dy = -(phi'/phi)(x) / S'(x),

    which tie the quadrature engine to the fundamental solutions."""
    x = float(x)
    if pair is None:
        pair = model.fundamental_pair(s)
    inv_scale = np.exp(-float(model.log_scale_density(x)))
    lhs_lo = s * _leg_lower(pair, None, x, cfg, ())
    rhs_lo = float(pair.dlogpsi(x)) * inv_scale
    lhs_hi = s * _leg_upper(pair, None, x, cfg, ())
    rhs_hi = -float(pair.dlogphi(x)) * inv_scale
    return {
        "lower": abs(lhs_lo - rhs_lo) / max(abs(rhs_lo), 1e-300),
        "upper": abs(lhs_hi - rhs_hi) / max(abs(rhs_hi), 1e-300),
    }


def _fd_derivatives(values: Sequence[float], h: float) -> tuple[float, float]:
    """Richardson-extrapolated first/second derivatives from the 5-point
    stencil [x-h, x-h/2, x, x+h/2, x+h]."""
    vm, vmh, v0, vph, vp = values
    d1_h = (vp - vm) / (2.0 * h)
    d1_h2 = (vph - vmh) / h
    d2_h = (vp - 2.0 * v0 + vm) / h**2
    d2_h2 = (vph - 2.0 * v0 + vmh) / (0.5 * h) ** 2
    return (4.0 * d1_h2 - d1_h) / 3.0, (4.0 * d2_h2 - d2_h) / 3.0


def resolvent_identity_residuals(
    model: DiffusionModel,
    r: float,
    lam: float,
    pi: Func,
    gamma: float,
    x: float,
    cfg: QuadratureConfig = SOLVER_CONFIG,
    kinks: Sequence[float] = (),
    fd_step: float = 1e-3,
) -> dict[str, float]:
    """Relative residuals of the resolvent identities behind the
    reduction of the constrained problems to the unconstrained yield.

    With theta(y) = pi(y) + gamma (mu(y) - r y) and
    pi_gamma(y) = pi(y) + lam gamma y:

      yield_identity  R_r theta = R_r pi - gamma id
      drift_identity  R_{r+lam} pi_gamma - R_{r+lam} theta = gamma id
      resolvent_ode   (A - r) R_r pi = -pi, with A applied by
                      finite differences of the computed R_r pi.
    """
    x = float(x)

    def theta(y: np.ndarray) -> np.ndarray:
        return pi(y) + gamma * (model.drift(y) - r * y)

    def pi_gamma(y: np.ndarray) -> np.ndarray:
        return pi(y) + lam * gamma * y

    pair_r = model.fundamental_pair(r)
    pair_rl = model.fundamental_pair(r + lam)

    r_theta = resolvent(model, r, theta, x, 0, cfg, kinks, pair_r)
    r_pi = resolvent(model, r, pi, x, 0, cfg, kinks, pair_r)
    scale = max(1.0, abs(r_pi), abs(gamma * x))
    yield_res = abs(r_theta - (r_pi - gamma * x)) / scale

    rl_pig = resolvent(model, r + lam, pi_gamma, x, 0, cfg, kinks, pair_rl)
    rl_theta = resolvent(model, r + lam, theta, x, 0, cfg, kinks, pair_rl)
    scale = max(1.0, abs(rl_pig), abs(gamma * x))
    drift_res = abs(rl_pig - rl_theta - gamma * x) / scale

    h = fd_step * max(1.0, abs(x))
    stencil = [x - h, x - 0.5 * h, x, x + 0.5 * h, x + h]
    vals = [resolvent(model, r, pi, xi, 0, cfg, kinks, pair_r) for xi in stencil]
    d1, d2 = _fd_derivatives(vals, h)
    lhs = float(model.drift(x)) * d1 + 0.5 * float(model.sigma(x)) ** 2 * d2
    ode_res = abs(lhs - r * vals[2] + float(pi(np.asarray(x)))) / max(
        1.0, abs(float(pi(np.asarray(x)))), r * abs(vals[2])
    )
    return {
        "yield_identity": yield_res,
        "drift_identity": drift_res,
        "resolvent_ode": ode_res,
    }


def feller_gap(
    model: DiffusionModel,
    r: float,
    lam: float,
    f: Func,
    xs: Sequence[float],
    cfg: QuadratureConfig = SOLVER_CONFIG,
    kinks: Sequence[float] = (),
) -> float:
    """max over xs of |lam R_{r+lam} f(x) - f(x)| / (1 + |f(x)|).

    Tends to 0 as lam grows; useful as a resolution check on the
    high-rate machinery."""
    pair = model.fundamental_pair(r + lam)
    worst = 0.0
    for x in xs:
        rx = resolvent(model, r + lam, f, float(x), 0, cfg, kinks, pair)
        fx = float(f(np.asarray(float(x))))
        worst = max(worst, abs(lam * rx - fx) / (1.0 + abs(fx)))
    return worst
