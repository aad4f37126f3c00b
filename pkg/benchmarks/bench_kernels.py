"""Compare the compiled simulation kernels against the pure-Python fallback.

Runs the same workloads through both backends, checks that the outputs are
bit-identical, and reports throughput in Euler steps per second.

    python3 benchmarks/bench_kernels.py [--paths N] [--horizon T] [--dt DT]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from diffctrl.models import BrownianMotion, OrnsteinUhlenbeck
from diffctrl.problems import ProblemSpec, make_cost
from diffctrl.sim import (
    SimConfig,
    active_backend,
    estimate_cost,
    simulate_constrained,
    simulate_reflected,
)


def _run(case, backend, paths, horizon, dt):
    name, spec, kind, arg = case
    cfg = SimConfig(
        dt=dt,
        horizon=horizon,
        n_paths=paths,
        seed=1234,
        x0=0.0,
        discount=arg.get("discount", 0.0),
        backend=backend,
    )
    t0 = time.perf_counter()
    if kind == "reflect":
        batch = simulate_reflected(spec, arg["barrier"], cfg)
    else:
        batch = simulate_constrained(spec, arg["threshold"], arg["lam"], cfg)
    elapsed = time.perf_counter() - t0
    est = estimate_cost(batch)
    return batch, est, elapsed


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--paths", type=int, default=2000)
    ap.add_argument("--horizon", type=float, default=200.0)
    ap.add_argument("--dt", type=float, default=1e-2)
    args = ap.parse_args()

    if active_backend() != "compiled":
        print("compiled backend unavailable; nothing to compare")
        return 1

    bm = ProblemSpec(BrownianMotion(mu=0.1, sigma=1.0), make_cost("quadratic"), gamma=0.001)
    ou = ProblemSpec(OrnsteinUhlenbeck(kappa=1.0, sigma=1.0), make_cost("absolute"), gamma=0.1)
    cases = [
        ("bm reflect (disc)", bm, "reflect", {"barrier": 4.0, "discount": 0.001}),
        ("ou reflect (erg)", ou, "reflect", {"barrier": 0.5}),
        ("bm poisson (disc)", bm, "poisson", {"threshold": 4.0, "lam": 1.0, "discount": 0.001}),
        ("ou poisson (erg)", ou, "poisson", {"threshold": 0.4, "lam": 20.0}),
    ]

    steps = args.paths * int(round(args.horizon / args.dt))
    print(f"{args.paths} paths x {int(round(args.horizon / args.dt))} steps each\n")
    header = f"{'case':<20} {'compiled':>12} {'python':>12} {'speedup':>9}  identical"
    print(header)
    print("-" * len(header))
    for case in cases:
        bc, ec, tc = _run(case, "compiled", args.paths, args.horizon, args.dt)
        bp, ep, tp = _run(case, "python", args.paths, args.horizon, args.dt)
        same = (
            np.array_equal(bc.running, bp.running)
            and np.array_equal(bc.control, bp.control)
            and np.array_equal(bc.final_x, bp.final_x)
            and ec.mean == ep.mean
        )
        print(
            f"{case[0]:<20} {steps / tc / 1e6:>9.1f} M/s {steps / tp / 1e6:>9.2f} M/s"
            f" {tp / tc:>8.1f}x  {same}"
        )
        if not same:
            print("  backend outputs differ; investigate before trusting either")
            return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
