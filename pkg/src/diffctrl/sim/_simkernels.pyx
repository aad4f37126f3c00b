# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled Monte Carlo stepping kernels.

Operation-for-operation mirror of `_kernels_py` (see the parity contract
in its docstring): same stream consumption order via numpy's C
distribution functions, same expression shapes, no fused multiply-adds
(built with -ffp-contract=off).  Drift kinds: 0 = constant mu,
1 = -kappa*x.  Cost kinds: 0 = x^2, 1 = |x|, 2 = max(x, 0).
"""

from cpython.pycapsule cimport PyCapsule_GetPointer
from libc.math cimport exp, fabs, sqrt
from libc.stdlib cimport free, malloc

from numpy.random cimport bitgen_t
from numpy.random.c_distributions cimport (
    random_standard_exponential,
    random_standard_normal,
)

from ._kernels_py import _blowup

BACKEND = "compiled"

cdef const char *_CAPSULE = b"BitGenerator"


cdef inline double _drift(int kind, double p, double x) noexcept nogil:
    if kind == 0:
        return p
    return -p * x


cdef inline double _cost(int kind, double x) noexcept nogil:
    if kind == 0:
        return x * x
    if kind == 1:
        return fabs(x)
    return x if x > 0.0 else 0.0


cdef bitgen_t **_states(list gens) except NULL:
    cdef Py_ssize_t n = len(gens)
    cdef bitgen_t **out = <bitgen_t **> malloc(n * sizeof(bitgen_t *))
    cdef Py_ssize_t i
    if out == NULL:
        raise MemoryError()
    for i in range(n):
        out[i] = <bitgen_t *> PyCapsule_GetPointer(gens[i].capsule, _CAPSULE)
        if out[i] == NULL:
            free(out)
            raise ValueError("not a BitGenerator capsule")
    return out


def reflected_kernel(
    list wiener,
    const unsigned char[::1] negate,
    int drift_kind,
    double drift_param,
    double sigma0,
    int cost_kind,
    double gamma,
    double x0,
    double barrier,
    double dt,
    long n_steps,
    double r,
    double burn_start,
    double guard,
    double[::1] running,
    double[::1] control,
    double[::1] push_total,
    long[::1] push_count,
    double[::1] final_x,
    long offset,
):
    """Advance len(wiener) reflected paths; outputs land in the slices."""
    cdef Py_ssize_t n = len(wiener)
    cdef bitgen_t **bgs = _states(wiener)
    cdef double dstep = exp(-r * dt)
    cdef double sig_sqrtdt = sigma0 * sqrt(dt)
    cdef Py_ssize_t i
    cdef long k, pcnt
    cdef double x, disc, run, ctl, ptot, z, push, t1
    cdef long bad = -1
    cdef double bad_t = 0.0
    try:
        with nogil:
            for i in range(n):
                x = x0
                disc = 1.0
                run = 0.0
                ctl = 0.0
                ptot = 0.0
                pcnt = 0
                if x0 > barrier:
                    push = x0 - barrier
                    if 0.0 >= burn_start:
                        ctl += disc * gamma * push
                    ptot += push
                    pcnt += 1
                    x = barrier
                for k in range(n_steps):
                    if k * dt >= burn_start:
                        run += disc * _cost(cost_kind, x) * dt
                    z = random_standard_normal(bgs[i])
                    if negate[i]:
                        z = -z
                    x = x + _drift(drift_kind, drift_param, x) * dt + sig_sqrtdt * z
                    disc *= dstep
                    t1 = (k + 1) * dt
                    if x > barrier:
                        push = x - barrier
                        if t1 >= burn_start:
                            ctl += disc * gamma * push
                        ptot += push
                        pcnt += 1
                        x = barrier
                    if fabs(x) > guard:
                        bad = offset + i
                        bad_t = t1
                        break
                    if disc == 0.0:
                        # underflowed discount: statistics are final
                        break
                if bad >= 0:
                    break
                running[i] = run
                control[i] = ctl
                push_total[i] = ptot
                push_count[i] = pcnt
                final_x[i] = x
    finally:
        free(bgs)
    if bad >= 0:
        raise _blowup(bad, bad_t, guard)


def poisson_kernel(
    list wiener,
    list arrivals,
    const unsigned char[::1] negate,
    int drift_kind,
    double drift_param,
    double sigma0,
    int cost_kind,
    double gamma,
    double x0,
    double threshold,
    double lam,
    double dt,
    long n_steps,
    double r,
    double burn_start,
    double guard,
    double[::1] running,
    double[::1] control,
    double[::1] push_total,
    long[::1] push_count,
    double[::1] final_x,
    long offset,
):
    """Poisson-constrained paths: exact arrival times merged into the grid."""
    cdef Py_ssize_t n = len(wiener)
    cdef bitgen_t **bgw = _states(wiener)
    cdef bitgen_t **bga = NULL
    cdef double dstep = exp(-r * dt)
    cdef double sig_sqrtdt = sigma0 * sqrt(dt)
    cdef Py_ssize_t i
    cdef long k, pcnt
    cdef double x, disc, run, ctl, ptot, z, push
    cdef double t0, t1, t_cur, next_arr, sub, rem
    cdef long bad = -1
    cdef double bad_t = 0.0
    try:
        bga = _states(arrivals)
        with nogil:
            for i in range(n):
                x = x0
                disc = 1.0
                run = 0.0
                ctl = 0.0
                ptot = 0.0
                pcnt = 0
                next_arr = random_standard_exponential(bga[i]) / lam
                for k in range(n_steps):
                    t0 = k * dt
                    t1 = (k + 1) * dt
                    t_cur = t0
                    while next_arr <= t1:
                        sub = next_arr - t_cur
                        if sub > 0.0:
                            if t_cur >= burn_start:
                                run += disc * _cost(cost_kind, x) * sub
                            z = random_standard_normal(bgw[i])
                            if negate[i]:
                                z = -z
                            x = x + _drift(drift_kind, drift_param, x) * sub + (sigma0 * sqrt(sub)) * z
                            disc *= exp(-r * sub)
                            if fabs(x) > guard:
                                bad = offset + i
                                bad_t = next_arr
                                break
                        t_cur = next_arr
                        if x > threshold:
                            push = x - threshold
                            if t_cur >= burn_start:
                                ctl += disc * gamma * push
                            ptot += push
                            pcnt += 1
                            x = threshold
                        next_arr = next_arr + random_standard_exponential(bga[i]) / lam
                    if bad >= 0:
                        break
                    if t_cur == t0:
                        if t0 >= burn_start:
                            run += disc * _cost(cost_kind, x) * dt
                        z = random_standard_normal(bgw[i])
                        if negate[i]:
                            z = -z
                        x = x + _drift(drift_kind, drift_param, x) * dt + sig_sqrtdt * z
                        disc *= dstep
                    else:
                        rem = t1 - t_cur
                        if rem > 0.0:
                            if t_cur >= burn_start:
                                run += disc * _cost(cost_kind, x) * rem
                            z = random_standard_normal(bgw[i])
                            if negate[i]:
                                z = -z
                            x = x + _drift(drift_kind, drift_param, x) * rem + (sigma0 * sqrt(rem)) * z
                            disc *= exp(-r * rem)
                    if fabs(x) > guard:
                        bad = offset + i
                        bad_t = t1
                        break
                    if disc == 0.0:
                        # underflowed discount: statistics are final
                        break
                if bad >= 0:
                    break
                running[i] = run
                control[i] = ctl
                push_total[i] = ptot
                push_count[i] = pcnt
                final_x[i] = x
    finally:
        free(bgw)
        if bga != NULL:
            free(bga)
    if bad >= 0:
        raise _blowup(bad, bad_t, guard)
