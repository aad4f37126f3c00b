"""Bracketed scalar root finding for threshold conditions.

Threshold conditions arrive as scalar functions with exactly one sign
change in the region of interest (the audit layer checks the structural
assumptions behind that).  Here we expand a bracket geometrically from a
seed, refine with Brent's method, and optionally rescan the bracket to
confirm the crossing is unique.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .errors import NoRootError

__all__ = ["RootResult", "solve_root"]


@dataclass(frozen=True)
class RootResult:
    root: float
    bracket: tuple[float, float]
    residual: float
    evaluations: int
    unique_in_bracket: bool | None = None
    history: tuple[tuple[float, float], ...] = field(default=(), repr=False)


def _expand_bracket(
    fn: Callable[[float], float],
    seed: float,
    step: float,
    factor: float,
    max_steps: int,
    lo_limit: float,
    hi_limit: float,
):
    """Walk outward from seed until fn changes sign.

    Returns (lo, hi, f_lo, f_hi, evals, history)."""
    history: list[tuple[float, float]] = []

    def ev(x: float) -> float:
        v = float(fn(x))
        if not np.isfinite(v):
            raise NoRootError(f"threshold condition returned {v!r} at {x:.6g}")
        history.append((x, v))
        return v

    lo = hi = float(seed)
    f_lo = f_hi = ev(seed)
    h = step
    for _ in range(max_steps):
        if np.sign(f_lo) != np.sign(f_hi):
            return lo, hi, f_lo, f_hi, len(history), history
        moved = False
        cand = max(lo - h, lo_limit)
        if cand < lo:
            lo, f_lo = cand, ev(cand)
            moved = True
        if np.sign(f_lo) == np.sign(f_hi):
            cand = min(hi + h, hi_limit)
            if cand > hi:
                hi, f_hi = cand, ev(cand)
                moved = True
        if not moved:
            break
        h *= factor
    if np.sign(f_lo) != np.sign(f_hi):
        return lo, hi, f_lo, f_hi, len(history), history
    raise NoRootError(
        f"no sign change found in [{lo:.6g}, {hi:.6g}] "
        f"after {len(history)} evaluations (seed {seed:.6g})"
    )


def solve_root(
    fn: Callable[[float], float],
    seed: float,
    step: float = 0.25,
    factor: float = 1.9,
    max_steps: int = 60,
    xtol: float = 1e-12,
    rtol: float = 4e-16,
    lo_limit: float = -np.inf,
    hi_limit: float = np.inf,
    scan: int = 0,
) -> RootResult:
    """Find the root of fn near seed.

    scan > 0 additionally samples the final bracket at that many points
    and records whether the sign pattern shows a single crossing.
    """
    lo, hi, f_lo, f_hi, evals, history = _expand_bracket(
        fn, seed, step, factor, max_steps, lo_limit, hi_limit
    )
    if f_lo == 0.0:
        root, res = lo, 0.0
    elif f_hi == 0.0:
        root, res = hi, 0.0
    else:
        root, info = brentq(
            fn, lo, hi, xtol=xtol, rtol=max(rtol, 1e-15), full_output=True
        )
        evals += info.function_calls
        res = float(fn(root))
        evals += 1
    unique = None
    if scan and hi > lo:
        xs = np.linspace(lo, hi, scan)
        vals = np.array([float(fn(x)) for x in xs])
        evals += scan
        signs = np.sign(vals[np.abs(vals) > 0])
        unique = bool(np.count_nonzero(np.diff(signs)) <= 1)
    return RootResult(
        root=float(root),
        bracket=(float(lo), float(hi)),
        residual=abs(res),
        evaluations=evals,
        unique_in_bracket=unique,
        history=tuple(history),
    )
