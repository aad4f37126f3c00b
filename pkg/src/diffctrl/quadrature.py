"""Adaptive quadrature with batched integrand evaluation.

Finite intervals use a global-adaptive scheme with an embedded Gauss pair
(15/31 points) per panel; every refinement round evaluates all new panels
in a single vectorized call, which matters when the integrand itself is
expensive (special functions evaluated on arrays).

Unbounded tails are handled by geometrically growing windows away from the
finite endpoint; integration stops once several consecutive windows
contribute less than tolerance, and raises DivergenceError if the budget
runs out first.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .errors import DivergenceError, NumericError

Integrand = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class QuadratureConfig:
    """Tolerances and budgets shared by all integrals.

    abs_tol / rel_tol: the target is max(abs_tol, rel_tol * |integral|).
    max_subdivisions: total panel budget for one finite integral.
    max_windows: geometric window budget per unbounded tail.
    initial_window: width of the first tail window.
    tail_consecutive: how many negligible windows in a row end a tail.
    """

    abs_tol: float = 1e-10
    rel_tol: float = 1e-8
    max_subdivisions: int = 4000
    max_windows: int = 90
    initial_window: float = 1.0
    tail_consecutive: int = 3

    def __post_init__(self):
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_subdivisions < 4 or self.max_windows < 4:
            raise ValueError("budgets too small")

    def scaled(self, factor: float) -> "QuadratureConfig":
        """Same budgets, tolerances multiplied by factor (for sub-integrals)."""
        return QuadratureConfig(
            abs_tol=self.abs_tol * factor,
            rel_tol=self.rel_tol * factor,
            max_subdivisions=self.max_subdivisions,
            max_windows=self.max_windows,
            initial_window=self.initial_window,
            tail_consecutive=self.tail_consecutive,
        )


DEFAULT_CONFIG = QuadratureConfig()

# Tighter defaults used inside threshold solvers, where root conditions are
# differences of integrals and lose a few digits to cancellation.
SOLVER_CONFIG = QuadratureConfig(abs_tol=1e-13, rel_tol=1e-11)


@lru_cache(maxsize=None)
def _gauss_pair(n_lo: int = 15, n_hi: int = 31):
    xl, wl = np.polynomial.legendre.leggauss(n_lo)
    xh, wh = np.polynomial.legendre.leggauss(n_hi)
    return xl, wl, xh, wh


def _eval_panels(f: Integrand, lo: np.ndarray, hi: np.ndarray):
    """Coarse/fine Gauss estimates for each [lo_i, hi_i]; one integrand call."""
    xl, wl, xh, wh = _gauss_pair()
    mid = 0.5 * (lo + hi)[:, None]
    half = 0.5 * (hi - lo)[:, None]
    nodes = np.concatenate([mid + half * xl, mid + half * xh], axis=1)
    vals = np.asarray(f(nodes.ravel()), dtype=float).reshape(nodes.shape)
    if not np.all(np.isfinite(vals)):
        bad = nodes.ravel()[~np.isfinite(vals.ravel())]
        raise NumericError(f"integrand not finite near x={bad[0]:.6g}")
    n_lo = xl.size
    coarse = half[:, 0] * (vals[:, :n_lo] @ wl)
    fine = half[:, 0] * (vals[:, n_lo:] @ wh)
    return fine, np.abs(fine - coarse)


def integrate(
    f: Integrand,
    a: float,
    b: float,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
    kinks: Sequence[float] = (),
) -> float:
    """Integrate f over the finite interval [a, b].

    kinks: points where f loses smoothness; panels never straddle them.
    """
    if not (np.isfinite(a) and np.isfinite(b)):
        raise ValueError("integrate() needs finite endpoints; use the tail helpers")
    if a == b:
        return 0.0
    sign = 1.0
    if b < a:
        a, b, sign = b, a, -1.0
    cuts = [a] + sorted({float(k) for k in kinks if a < k < b}) + [b]
    lo = np.asarray(cuts[:-1], dtype=float)
    hi = np.asarray(cuts[1:], dtype=float)
    vals, errs = _eval_panels(f, lo, hi)

    while lo.size < cfg.max_subdivisions:
        total = float(vals.sum())
        err = float(errs.sum())
        tol = max(cfg.abs_tol, cfg.rel_tol * abs(total))
        if err <= tol:
            return sign * total
        # split every panel holding more than its fair share of the error
        share = tol / lo.size
        split = errs > max(share, 0.25 * float(errs.max()))
        if not split.any():
            split[int(np.argmax(errs))] = True
        mid = 0.5 * (lo[split] + hi[split])
        new_lo = np.concatenate([lo[split], mid])
        new_hi = np.concatenate([mid, hi[split]])
        new_vals, new_errs = _eval_panels(f, new_lo, new_hi)
        lo = np.concatenate([lo[~split], new_lo])
        hi = np.concatenate([hi[~split], new_hi])
        vals = np.concatenate([vals[~split], new_vals])
        errs = np.concatenate([errs[~split], new_errs])

    total = float(vals.sum())
    err = float(errs.sum())
    if err > max(cfg.abs_tol, cfg.rel_tol * abs(total)) * 100:
        raise NumericError(
            f"quadrature on [{a:.6g}, {b:.6g}] stalled at error {err:.3g} "
            f"after {lo.size} panels"
        )
    return sign * total


def _tail(
    f: Integrand,
    start: float,
    direction: float,
    cfg: QuadratureConfig,
    kinks: Sequence[float],
    stop: float = np.inf,
) -> float:
    """Integral from `start` toward +/-infinity via geometrically growing
    windows, optionally cut at finite `stop` (which must lie past all the
    integrand's mass; this is checked)."""
    win_cfg = cfg.scaled(0.25)
    width = cfg.initial_window
    total = 0.0
    edge = start
    quiet = 0
    recent = []
    for _ in range(cfg.max_windows):
        far = edge + direction * width
        if direction * (far - stop) >= 0:
            far = stop
        if direction > 0:
            part = integrate(f, edge, far, win_cfg, kinks=kinks)
        else:
            part = integrate(f, far, edge, win_cfg, kinks=kinks)
        total += part
        recent.append(part)
        if abs(part) <= max(cfg.abs_tol, cfg.rel_tol * abs(total)):
            quiet += 1
            if quiet >= cfg.tail_consecutive:
                return total
        else:
            quiet = 0
        if far == stop:
            if quiet >= 1:
                return total
            raise NumericError(
                f"integrand had not decayed at the working-interval edge "
                f"{stop:.6g}; widen the working interval"
            )
        edge = far
        width *= 2.0
    raise DivergenceError(
        f"tail toward {'+inf' if direction > 0 else '-inf'} from {start:.6g} "
        f"did not settle after {cfg.max_windows} windows; "
        f"last contributions {[f'{p:.3g}' for p in recent[-4:]]}"
    )


def integrate_upper(
    f: Integrand,
    a: float,
    b: float = np.inf,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
    kinks: Sequence[float] = (),
    truncated: bool = False,
) -> float:
    """Integrate f over [a, b]; b may be +inf.

    truncated=True means finite b stands in for +inf (working-interval
    cut): the integral proceeds in windows and demands decay before b.
    """
    if np.isfinite(b) and not truncated:
        return integrate(f, a, b, cfg, kinks=kinks)
    return _tail(f, a, +1.0, cfg, kinks, stop=b)


def integrate_lower(
    f: Integrand,
    b: float,
    a: float = -np.inf,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
    kinks: Sequence[float] = (),
    truncated: bool = False,
) -> float:
    """Integrate f over [a, b]; a may be -inf (or a truncation stand-in)."""
    if np.isfinite(a) and not truncated:
        return integrate(f, a, b, cfg, kinks=kinks)
    return _tail(f, b, -1.0, cfg, kinks, stop=a)
