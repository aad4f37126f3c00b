"""Monte Carlo verification of the analytic values.

Simulates the controlled SDE under the two threshold policies and turns
path totals into cost estimates with standard errors:

* `simulate_reflected`: instant downward pushes at a barrier (discrete
  Skorokhod projection of the Euler proposal; an initial push at t=0 if
  the start is above the barrier).
* `simulate_constrained`: pushes to the threshold only at the arrival
  times of an independent Poisson clock, arrival times sampled exactly
  and merged into the step grid.

`discount > 0` accrues e^{-rt}-weighted costs over the horizon;
`discount = 0` switches to long-run averaging: the first
`burn_in_fraction` of the horizon is simulated but not billed, and
per-path totals are divided by the billed time span.

Two interchangeable backends run the stepping: a compiled kernel
(Cython, built at install time) and a numpy/Python fallback.  They
consume identical per-path random streams (see `_streams`) and perform
identical floating-point operations, so estimates agree bit for bit for
the built-in model and cost kinds; `backend="auto"` picks the compiled
one when it can.  Replicates are independent; threaded runs write into
per-path slots and reduce in path order, so results do not depend on
scheduling.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError, NumericError, PreconditionError
from ..problems import ProblemSpec
from ..solvers import SCHEMA_VERSION
from . import _streams
from ._kernels_py import poisson_path, reflected_block, reflected_path

try:
    from . import _simkernels
except ImportError:  # pragma: no cover - depends on the build environment
    _simkernels = None

__all__ = [
    "SimConfig",
    "PathBatch",
    "CostEstimate",
    "simulate_reflected",
    "simulate_constrained",
    "estimate_cost",
    "corrected_barrier",
    "extrapolate_dt",
    "event_log_reflected",
    "event_log_constrained",
    "active_backend",
]

_DRIFT_KIND = {"bm": 0, "ou": 1}
_COST_KIND = {"quadratic": 0, "absolute": 1, "positive_part": 2}

_BLOCK_PATHS = 4096


def active_backend() -> str:
    """Backend `backend="auto"` resolves to for supported inputs."""
    return "python" if _simkernels is None else "compiled"


def _kernel_ready(spec: ProblemSpec) -> bool:
    return spec.model.kind in _DRIFT_KIND and spec.cost.name in _COST_KIND


def _resolve_backend(requested: str, spec: ProblemSpec) -> str:
    if requested == "python":
        return "python"
    if requested == "compiled":
        if _simkernels is None:
            raise ConfigError("compiled kernels are not built in this environment")
        if not _kernel_ready(spec):
            raise ConfigError(
                "compiled kernels cover model kinds "
                f"{sorted(_DRIFT_KIND)} and cost kinds {sorted(_COST_KIND)}; "
                f"got {spec.model.kind!r}/{spec.cost.name!r} (use backend='python')"
            )
        return "compiled"
    if requested == "auto":
        if _simkernels is not None and _kernel_ready(spec):
            return "compiled"
        return "python"
    raise ConfigError(f"backend must be auto|compiled|python, got {requested!r}")


@dataclass(frozen=True)
class SimConfig:
    """Run geometry shared by both policies.

    discount = 0 selects ergodic (time-average) accounting; positive
    discount accrues e^{-rt} weights from t = 0 with no burn-in.
    """

    dt: float
    horizon: float
    n_paths: int
    seed: int
    x0: float
    discount: float = 0.0
    burn_in_fraction: float = 0.1
    antithetic: bool = False
    overflow_guard: float = 1e8
    backend: str = "auto"
    threads: int = 1

    def __post_init__(self):
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise PreconditionError(f"dt must be positive, got {self.dt!r}")
        if not (self.horizon >= 100 * self.dt):
            raise PreconditionError(
                f"horizon must cover at least 100 steps, got {self.horizon!r} at dt={self.dt!r}"
            )
        if self.n_paths < 2:
            raise PreconditionError(f"need at least 2 paths, got {self.n_paths!r}")
        if self.antithetic and self.n_paths % 2:
            raise PreconditionError("antithetic pairing needs an even path count")
        if self.discount < 0 or not math.isfinite(self.discount):
            raise PreconditionError(f"discount must be >= 0, got {self.discount!r}")
        if not (0 <= self.burn_in_fraction < 1):
            raise PreconditionError(
                f"burn-in fraction must lie in [0, 1), got {self.burn_in_fraction!r}"
            )
        if not math.isfinite(self.x0):
            raise PreconditionError(f"x0 must be finite, got {self.x0!r}")
        if self.threads < 1:
            raise PreconditionError(f"threads must be >= 1, got {self.threads!r}")
        if self.overflow_guard <= 0:
            raise PreconditionError("overflow guard must be positive")

    @property
    def n_steps(self) -> int:
        return int(round(self.horizon / self.dt))

    @property
    def effective_horizon(self) -> float:
        # the grid, not the requested horizon, is what gets simulated
        return self.n_steps * self.dt

    @property
    def is_discounted(self) -> bool:
        return self.discount > 0

    @property
    def burn_start(self) -> float:
        if self.is_discounted:
            return 0.0
        return self.burn_in_fraction * self.effective_horizon

    @property
    def elapsed(self) -> float:
        return self.effective_horizon - self.burn_start


@dataclass(frozen=True)
class PathBatch:
    """Raw per-path accounting, one slot per path in path order.

    running/control are cost-weighted (discounted or post-burn-in);
    push_total and push_count cover the whole path for diagnostics.
    """

    policy: dict
    mode: str
    seed: int
    dt: float
    horizon: float
    discount: float
    burn_start: float
    elapsed: float
    x0: float
    antithetic: bool
    backend: str
    running: np.ndarray = field(repr=False)
    control: np.ndarray = field(repr=False)
    push_total: np.ndarray = field(repr=False)
    push_count: np.ndarray = field(repr=False)
    final_x: np.ndarray = field(repr=False)

    @property
    def n_paths(self) -> int:
        return self.running.shape[0]

    def path_totals(self) -> np.ndarray:
        """Per-path objective samples (time-averaged in ergodic mode)."""
        totals = self.running + self.control
        if self.mode == "ergodic":
            totals = totals / self.elapsed
        return totals


@dataclass(frozen=True)
class CostEstimate:
    mean: float
    std_error: float
    n_paths: int
    policy: dict
    mode: str
    breakdown: dict
    backend: str
    seed: int

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "mean": self.mean,
            "std_error": self.std_error,
            "n_paths": self.n_paths,
            "policy": dict(self.policy),
            "mode": self.mode,
            "breakdown": dict(self.breakdown),
            "backend": self.backend,
            "seed": self.seed,
        }

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    def __str__(self) -> str:
        kind = self.policy.get("kind", "?")
        return (
            f"{kind} [{self.mode}]: {self.mean:.6g} +- {self.std_error:.2g} "
            f"(n={self.n_paths}, {self.backend})"
        )


def _chunk_ranges(n: int, threads: int) -> list[tuple[int, int]]:
    pieces = max(1, min(n, threads * 4))
    size = -(-n // pieces)
    return [(s, min(n, s + size)) for s in range(0, n, size)]


def _path_streams(cfg: SimConfig, start: int, stop: int, purpose: int) -> list:
    return [
        _streams.bit_generator(cfg.seed, _streams.stream_index(p, cfg.antithetic), purpose)
        for p in range(start, stop)
    ]


def _negate_flags(cfg: SimConfig, start: int, stop: int) -> np.ndarray:
    return np.array(
        [_streams.negate_increments(p, cfg.antithetic) for p in range(start, stop)],
        dtype=np.uint8,
    )


def _run_threaded(worker, cfg: SimConfig, n: int) -> None:
    ranges = _chunk_ranges(n, cfg.threads)
    if cfg.threads == 1 or len(ranges) == 1:
        for rng in ranges:
            worker(rng)
        return
    with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
        # surface the first worker exception, if any
        for fut in [pool.submit(worker, rng) for rng in ranges]:
            fut.result()


def _batch(spec: ProblemSpec, cfg: SimConfig, policy: dict, backend: str, outs) -> PathBatch:
    running, control, push_total, push_count, final_x = outs
    return PathBatch(
        policy=policy,
        mode="discounted" if cfg.is_discounted else "ergodic",
        seed=cfg.seed,
        dt=cfg.dt,
        horizon=cfg.effective_horizon,
        discount=cfg.discount,
        burn_start=cfg.burn_start,
        elapsed=cfg.elapsed,
        x0=cfg.x0,
        antithetic=cfg.antithetic,
        backend=backend,
        running=running,
        control=control,
        push_total=push_total,
        push_count=push_count,
        final_x=final_x,
    )


def _alloc(n: int):
    return (
        np.zeros(n),
        np.zeros(n),
        np.zeros(n),
        np.zeros(n, dtype=np.int64),
        np.zeros(n),
    )


def simulate_reflected(spec: ProblemSpec, barrier: float, cfg: SimConfig) -> PathBatch:
    """Instant-push (reflecting barrier) policy under `spec`'s model/cost.

    barrier = +inf degenerates to the uncontrolled SDE.  A start above
    the barrier is projected down at t=0 and charged like any push.
    """
    if math.isnan(barrier) or barrier == -math.inf:
        raise PreconditionError(f"barrier must be a real level or +inf, got {barrier!r}")
    backend = _resolve_backend(cfg.backend, spec)
    n = cfg.n_paths
    outs = _alloc(n)
    running, control, push_total, push_count, final_x = outs
    model, cost, gamma = spec.model, spec.cost, spec.gamma

    if backend == "compiled":
        def worker(rng: tuple[int, int]) -> None:
            start, stop = rng
            _simkernels.reflected_kernel(
                _path_streams(cfg, start, stop, _streams.WIENER),
                _negate_flags(cfg, start, stop),
                _DRIFT_KIND[model.kind],
                model.mu if model.kind == "bm" else model.kappa,
                model.sigma0,
                _COST_KIND[cost.name],
                gamma,
                cfg.x0,
                barrier,
                cfg.dt,
                cfg.n_steps,
                cfg.discount,
                cfg.burn_start,
                cfg.overflow_guard,
                running[start:stop],
                control[start:stop],
                push_total[start:stop],
                push_count[start:stop],
                final_x[start:stop],
                start,
            )

        _run_threaded(worker, cfg, n)
    else:
        for start in range(0, n, _BLOCK_PATHS):
            stop = min(n, start + _BLOCK_PATHS)
            gens = [np.random.Generator(bg) for bg in _path_streams(cfg, start, stop, _streams.WIENER)]
            reflected_block(
                model,
                cost,
                gamma,
                cfg.x0,
                barrier,
                cfg.dt,
                cfg.n_steps,
                cfg.discount,
                cfg.burn_start,
                cfg.overflow_guard,
                gens,
                list(_negate_flags(cfg, start, stop)),
                running[start:stop],
                control[start:stop],
                push_total[start:stop],
                push_count[start:stop],
                final_x[start:stop],
                start,
            )

    policy = {"kind": "reflect", "barrier": barrier}
    return _batch(spec, cfg, policy, backend, outs)


def simulate_constrained(
    spec: ProblemSpec, threshold: float, lam: float, cfg: SimConfig
) -> PathBatch:
    """Poisson-opportunity policy: push to `threshold` at arrivals only."""
    if not (lam > 0 and math.isfinite(lam)):
        raise PreconditionError(f"opportunity rate must be positive, got {lam!r}")
    if not math.isfinite(threshold):
        raise PreconditionError(f"threshold must be finite, got {threshold!r}")
    backend = _resolve_backend(cfg.backend, spec)
    n = cfg.n_paths
    outs = _alloc(n)
    running, control, push_total, push_count, final_x = outs
    model, cost, gamma = spec.model, spec.cost, spec.gamma

    if backend == "compiled":
        def worker(rng: tuple[int, int]) -> None:
            start, stop = rng
            _simkernels.poisson_kernel(
                _path_streams(cfg, start, stop, _streams.WIENER),
                _path_streams(cfg, start, stop, _streams.ARRIVALS),
                _negate_flags(cfg, start, stop),
                _DRIFT_KIND[model.kind],
                model.mu if model.kind == "bm" else model.kappa,
                model.sigma0,
                _COST_KIND[cost.name],
                gamma,
                cfg.x0,
                threshold,
                lam,
                cfg.dt,
                cfg.n_steps,
                cfg.discount,
                cfg.burn_start,
                cfg.overflow_guard,
                running[start:stop],
                control[start:stop],
                push_total[start:stop],
                push_count[start:stop],
                final_x[start:stop],
                start,
            )

        _run_threaded(worker, cfg, n)
    else:
        for p in range(n):
            rng_w = np.random.Generator(
                _streams.bit_generator(cfg.seed, _streams.stream_index(p, cfg.antithetic), _streams.WIENER)
            )
            rng_a = np.random.Generator(
                _streams.bit_generator(cfg.seed, _streams.stream_index(p, cfg.antithetic), _streams.ARRIVALS)
            )
            out = poisson_path(
                model,
                cost,
                gamma,
                cfg.x0,
                threshold,
                lam,
                cfg.dt,
                cfg.n_steps,
                cfg.discount,
                cfg.burn_start,
                cfg.overflow_guard,
                rng_w,
                rng_a,
                _streams.negate_increments(p, cfg.antithetic),
                p,
                early_stop=True,
            )
            running[p], control[p], push_total[p], push_count[p], final_x[p] = out

    policy = {"kind": "poisson-impulse", "threshold": threshold, "lam": lam}
    return _batch(spec, cfg, policy, backend, outs)


def estimate_cost(batch: PathBatch, tail_value=None) -> CostEstimate:
    """Sample mean and standard error of the per-path objective.

    The mean is reported as a sum of parts so the breakdown sums to it
    exactly.  Antithetic batches collapse each pair to its average before
    computing the spread.

    tail_value, a callable v(x), completes a discounted finite-horizon
    run to the infinite-horizon objective: each path gains
    e^{-r T} v(X_T), the expected cost past the horizon when v is the
    value function of the simulated policy.  Without it the estimate is
    the truncated objective, adequate once e^{-r T} is negligible.
    """
    n = batch.n_paths
    if n < 2:
        raise PreconditionError(f"need at least 2 paths to estimate, got {n}")
    scale = 1.0 if batch.mode == "discounted" else batch.elapsed
    run_part = float(np.mean(batch.running)) / scale
    ctl_part = float(np.mean(batch.control)) / scale
    mean = run_part + ctl_part
    breakdown = {"running": run_part, "control": ctl_part}
    replicates = batch.path_totals()
    if tail_value is not None:
        if batch.mode != "discounted":
            raise PreconditionError("tail completion applies to discounted batches only")
        weight = math.exp(-batch.discount * batch.horizon)
        tails = weight * np.array([float(tail_value(x)) for x in batch.final_x])
        tail_part = float(np.mean(tails))
        breakdown["tail"] = tail_part
        mean = mean + tail_part
        replicates = replicates + tails
    if batch.antithetic:
        replicates = replicates.reshape(-1, 2).mean(axis=1)
        if replicates.shape[0] < 2:
            raise PreconditionError("need at least 2 antithetic pairs to estimate")
    se = float(np.std(replicates, ddof=1) / math.sqrt(replicates.shape[0]))
    return CostEstimate(
        mean=mean,
        std_error=se,
        n_paths=n,
        policy=batch.policy,
        mode=batch.mode,
        breakdown=breakdown,
        backend=batch.backend,
        seed=batch.seed,
    )


REFLECT_SHIFT = 0.5826  # -zeta(1/2)/sqrt(2 pi)


def corrected_barrier(model, barrier: float, dt: float) -> float:
    """Projection level that emulates continuous reflection at `barrier`.

    A discrete monitor misses the excursions between grid points, so
    projecting at `barrier` behaves like a continuous barrier roughly
    0.5826 sigma sqrt(dt) higher.  Projecting at the returned (lowered)
    level cancels that displacement at leading order.
    """
    if barrier == math.inf:
        return barrier
    sig = getattr(model, "sigma0", None)
    sig = float(model.sigma(barrier)) if sig is None else float(sig)
    return barrier - REFLECT_SHIFT * sig * math.sqrt(dt)


def extrapolate_dt(fine: CostEstimate, coarse: CostEstimate) -> CostEstimate:
    """Cancel the leading O(dt) discretization bias across two runs.

    `fine` at step dt and `coarse` at 2 dt (independent seeds) combine to
    2*fine - coarse; standard errors add in quadrature.  This is the
    standard step-size extrapolation for Euler-scheme expectations and
    invariant measures.
    """
    if fine.mode != coarse.mode:
        raise PreconditionError(
            f"extrapolation needs matching modes, got {fine.mode}/{coarse.mode}"
        )
    if fine.policy.get("kind") != coarse.policy.get("kind"):
        raise PreconditionError("extrapolation needs matching policy kinds")
    keys = set(fine.breakdown) | set(coarse.breakdown)
    breakdown = {
        k: 2.0 * fine.breakdown.get(k, 0.0) - coarse.breakdown.get(k, 0.0) for k in keys
    }
    return CostEstimate(
        mean=2.0 * fine.mean - coarse.mean,
        std_error=math.sqrt(4.0 * fine.std_error**2 + coarse.std_error**2),
        n_paths=fine.n_paths,
        policy=dict(fine.policy),
        mode=fine.mode,
        breakdown=breakdown,
        backend=fine.backend,
        seed=fine.seed,
    )


def _log_rng(cfg: SimConfig, path: int, purpose: int) -> np.random.Generator:
    return np.random.Generator(
        _streams.bit_generator(cfg.seed, _streams.stream_index(path, cfg.antithetic), purpose)
    )


def event_log_reflected(
    spec: ProblemSpec, barrier: float, cfg: SimConfig, path: int = 0
) -> list[tuple[float, float, str, float]]:
    """(t, x, event, push_size) rows for one path; matches the batch run."""
    log: list[tuple[float, float, str, float]] = []
    reflected_path(
        spec.model,
        spec.cost,
        spec.gamma,
        cfg.x0,
        barrier,
        cfg.dt,
        cfg.n_steps,
        cfg.discount,
        cfg.burn_start,
        cfg.overflow_guard,
        _log_rng(cfg, path, _streams.WIENER),
        _streams.negate_increments(path, cfg.antithetic),
        path,
        log,
    )
    return log


def event_log_constrained(
    spec: ProblemSpec, threshold: float, lam: float, cfg: SimConfig, path: int = 0
) -> list[tuple[float, float, str, float]]:
    """(t, x, event, push_size) rows for one constrained path."""
    log: list[tuple[float, float, str, float]] = []
    poisson_path(
        spec.model,
        spec.cost,
        spec.gamma,
        cfg.x0,
        threshold,
        lam,
        cfg.dt,
        cfg.n_steps,
        cfg.discount,
        cfg.burn_start,
        cfg.overflow_guard,
        _log_rng(cfg, path, _streams.WIENER),
        _log_rng(cfg, path, _streams.ARRIVALS),
        _streams.negate_increments(path, cfg.antithetic),
        path,
        log,
    )
    return log
