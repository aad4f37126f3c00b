"""Numpy/Python stepping kernels: the fallback backend.

These mirror the compiled kernels operation for operation: identical
stream consumption order, identical arithmetic expression shapes, no
fused multiply-adds, scalar transcendentals through the same libm.  For
the model and cost kinds the compiled kernels recognize, a run is
bit-identical on either backend.

The reflected kernel advances a whole block of paths one step at a time
(elementwise IEEE operations match the compiled per-path scalars).  The
Poisson-constrained kernel is a straight per-path loop: arrival handling
is control flow interleaved with the stepping, so vectorizing it would
change the operation order; it is therefore much slower than the
compiled version and sized for verification runs, not production sweeps.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import NumericError

STEP_CHUNK = 2048


def _blowup(path_index: int, t: float, guard: float) -> NumericError:
    return NumericError(
        f"path {path_index} left |x| <= {guard:g} near t={t:g}; "
        "the Euler step is unstable here, reduce dt or shrink the horizon"
    )


def scalar_ops(model, cost):
    """Per-point drift/sigma/cost evaluators matching the compiled kernels.

    Recognized kinds expand to the same scalar expressions the compiled
    code uses; anything else falls back to the vectorized callables one
    point at a time (python backend only, so no parity constraint).
    """
    if model.kind == "bm":
        mu = model.mu
        drift = lambda x: mu
        sigma0, sigma = model.sigma0, None
    elif model.kind == "ou":
        kap = model.kappa
        drift = lambda x: -kap * x
        sigma0, sigma = model.sigma0, None
    else:
        drift = lambda x: float(model.drift(x))
        sigma0, sigma = None, lambda x: float(model.sigma(x))
    name = cost.name
    if name == "quadratic":
        pi = lambda x: x * x
    elif name == "absolute":
        pi = abs
    elif name == "positive_part":
        pi = lambda x: x if x > 0.0 else 0.0
    elif name == "power":
        p = float(cost.params["p"])
        pi = lambda x: abs(x) ** p
    else:
        pi = lambda x: float(cost(x))
    return drift, sigma0, sigma, pi


def reflected_block(
    model,
    cost,
    gamma: float,
    x0: float,
    barrier: float,
    dt: float,
    n_steps: int,
    r: float,
    burn_start: float,
    guard: float,
    rngs: list,
    negate: list,
    running: np.ndarray,
    control: np.ndarray,
    push_total: np.ndarray,
    push_count: np.ndarray,
    final_x: np.ndarray,
    offset: int = 0,
) -> None:
    """Advance len(rngs) reflected paths; results land in the output slices."""
    n = len(rngs)
    x = np.full(n, float(x0))
    run = np.zeros(n)
    ctl = np.zeros(n)
    ptot = np.zeros(n)
    pcnt = np.zeros(n, dtype=np.int64)
    disc = 1.0
    dstep = math.exp(-r * dt)
    sqrtdt = math.sqrt(dt)
    const_sigma = model.kind in ("bm", "ou")
    sig_sqrtdt = model.sigma0 * sqrtdt if const_sigma else None

    if x0 > barrier:
        push0 = x0 - barrier
        if 0.0 >= burn_start:
            ctl += disc * gamma * push0
        ptot += push0
        pcnt += 1
        x[:] = barrier

    k = 0
    stopped = False
    z = np.empty((n, STEP_CHUNK))
    while k < n_steps and not stopped:
        m = min(STEP_CHUNK, n_steps - k)
        for i, rng in enumerate(rngs):
            z[i, :m] = rng.standard_normal(m)
        for i, neg in enumerate(negate):
            if neg:
                np.negative(z[i, :m], out=z[i, :m])
        for j in range(m):
            t = (k + j) * dt
            if t >= burn_start:
                run += disc * cost(x) * dt
            zc = z[:, j]
            if const_sigma:
                x = x + model.drift(x) * dt + sig_sqrtdt * zc
            else:
                x = x + model.drift(x) * dt + (model.sigma(x) * sqrtdt) * zc
            disc *= dstep
            push = np.maximum(x - barrier, 0.0)
            if (k + j + 1) * dt >= burn_start:
                ctl += disc * gamma * push
            ptot += push
            pcnt += push > 0.0
            x = np.minimum(x, barrier)
            worst = int(np.argmax(np.abs(x)))
            if abs(x[worst]) > guard:
                raise _blowup(offset + worst, (k + j + 1) * dt, guard)
            if disc == 0.0:
                # discount factor underflowed: nothing later can change any
                # reported statistic, so the walk stops here
                stopped = True
                break
        k += m

    running[:] = run
    control[:] = ctl
    push_total[:] = ptot
    push_count[:] = pcnt
    final_x[:] = x


def reflected_path(
    model,
    cost,
    gamma: float,
    x0: float,
    barrier: float,
    dt: float,
    n_steps: int,
    r: float,
    burn_start: float,
    guard: float,
    rng,
    neg: bool,
    path_index: int = 0,
    log: list | None = None,
):
    """One reflected path, scalar arithmetic; also drives the event log."""
    drift, sigma0, sigma, pi = scalar_ops(model, cost)
    sqrtdt = math.sqrt(dt)
    dstep = math.exp(-r * dt)
    sig_sqrtdt = sigma0 * sqrtdt if sigma is None else None
    x = float(x0)
    disc = 1.0
    run = ctl = ptot = 0.0
    pcnt = 0

    if x > barrier:
        push0 = x - barrier
        if 0.0 >= burn_start:
            ctl += disc * gamma * push0
        ptot += push0
        pcnt += 1
        x = barrier
        if log is not None:
            log.append((0.0, x, "reflect", push0))

    for k in range(n_steps):
        t = k * dt
        if t >= burn_start:
            run += disc * pi(x) * dt
        zk = float(rng.standard_normal())
        if neg:
            zk = -zk
        if sigma is None:
            x = x + drift(x) * dt + sig_sqrtdt * zk
        else:
            x = x + drift(x) * dt + (sigma(x) * sqrtdt) * zk
        disc *= dstep
        t1 = (k + 1) * dt
        if x > barrier:
            push = x - barrier
            if t1 >= burn_start:
                ctl += disc * gamma * push
            ptot += push
            pcnt += 1
            x = barrier
            if log is not None:
                log.append((t1, x, "reflect", push))
        if abs(x) > guard:
            raise _blowup(path_index, t1, guard)
        if log is not None:
            log.append((t1, x, "step", 0.0))
    return run, ctl, ptot, pcnt, x


def poisson_path(
    model,
    cost,
    gamma: float,
    x0: float,
    threshold: float,
    lam: float,
    dt: float,
    n_steps: int,
    r: float,
    burn_start: float,
    guard: float,
    rng_w,
    rng_a,
    neg: bool,
    path_index: int = 0,
    log: list | None = None,
    early_stop: bool = False,
):
    """One Poisson-constrained path: exact arrivals merged into the grid.

    Between arrivals plain Euler steps on the regular grid; an arrival
    splits its step into exact substeps, and pushes (to the threshold,
    from above only) happen at the arrival instant.  With early_stop the
    walk ends once the discount factor underflows to zero (statistics are
    already final at that point); event-log runs keep the full horizon.
    """
    drift, sigma0, sigma, pi = scalar_ops(model, cost)
    sqrtdt = math.sqrt(dt)
    dstep = math.exp(-r * dt)
    sig_sqrtdt = sigma0 * sqrtdt if sigma is None else None
    x = float(x0)
    disc = 1.0
    run = ctl = ptot = 0.0
    pcnt = 0
    next_arr = float(rng_a.standard_exponential()) / lam

    for k in range(n_steps):
        t0 = k * dt
        t1 = (k + 1) * dt
        t_cur = t0
        while next_arr <= t1:
            sub = next_arr - t_cur
            if sub > 0.0:
                if t_cur >= burn_start:
                    run += disc * pi(x) * sub
                zk = float(rng_w.standard_normal())
                if neg:
                    zk = -zk
                sig = sigma0 if sigma is None else sigma(x)
                x = x + drift(x) * sub + (sig * math.sqrt(sub)) * zk
                disc *= math.exp(-r * sub)
                if abs(x) > guard:
                    raise _blowup(path_index, next_arr, guard)
                if log is not None:
                    log.append((next_arr, x, "step", 0.0))
            t_cur = next_arr
            if x > threshold:
                push = x - threshold
                if t_cur >= burn_start:
                    ctl += disc * gamma * push
                ptot += push
                pcnt += 1
                x = threshold
                if log is not None:
                    log.append((t_cur, x, "poisson-push", push))
            next_arr = next_arr + float(rng_a.standard_exponential()) / lam
        if t_cur == t0:
            # arrival-free step, precomputed constants
            if t0 >= burn_start:
                run += disc * pi(x) * dt
            zk = float(rng_w.standard_normal())
            if neg:
                zk = -zk
            if sigma is None:
                x = x + drift(x) * dt + sig_sqrtdt * zk
            else:
                x = x + drift(x) * dt + (sigma(x) * sqrtdt) * zk
            disc *= dstep
        else:
            rem = t1 - t_cur
            if rem > 0.0:
                if t_cur >= burn_start:
                    run += disc * pi(x) * rem
                zk = float(rng_w.standard_normal())
                if neg:
                    zk = -zk
                sig = sigma0 if sigma is None else sigma(x)
                x = x + drift(x) * rem + (sig * math.sqrt(rem)) * zk
                disc *= math.exp(-r * rem)
        if abs(x) > guard:
            raise _blowup(path_index, t1, guard)
        if log is not None:
            log.append((t1, x, "step", 0.0))
        if early_stop and disc == 0.0:
            break
    return run, ctl, ptot, pcnt, x
