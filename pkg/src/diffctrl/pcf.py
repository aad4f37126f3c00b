"""Parabolic cylinder function D_nu on a log scale, for nu <= 0.

D_nu enters the increasing/decreasing solutions of the stationary
Kolmogorov equation for mean-reverting diffusions. The orders needed here
go down to nu ~ -1000 (rate / mean-reversion speed), where D_nu itself
under- or overflows double precision by hundreds of orders of magnitude,
so every public function returns logarithms.

Method: the integral representation (valid for all nu < 0)

    D_nu(z) = e^{-z^2/4} / Gamma(-nu) * I(a, z),
    I(a, z) = int_0^inf t^a e^{-t^2/2 - z t} dt,   a = -nu - 1,

with the head int_0^c expanded as an exact double power series (the t^a
endpoint is integrated analytically, term by term) and the tail int_c^inf
integrated on panels concentrated around the peak of the log-integrand.
The peak location and curvature are computed per argument, so one fixed
panel pattern serves every (nu, z); in t-space the curvature a/t*^2 + 1
stays O(1) even at a ~ 1000, which keeps the pattern short.

The three-term order recurrence is deliberately NOT used: downward it is
unstable in the strip 0 > nu > -z^2 for z > 0 (D_nu is the locally minimal
solution there), and that strip is exactly where large-rate evaluations
land.
"""

from __future__ import annotations

import numpy as np
from scipy.special import gammaln

from .errors import NumericError

_OFFSETS = np.array(
    [0.0, 0.3, 0.684, 1.18, 1.81, 2.62, 3.65, 4.97, 6.66, 8.83,
     11.6, 15.2, 19.7, 25.6, 33.2, 43.0, 55.6, 71.9, 93.0]
)
_OMAX = float(_OFFSETS[-1])
_GLX, _GLW = np.polynomial.legendre.leggauss(16)
_DROP = 85.0   # stop once the log-integrand is this far below its peak
_NJ, _NK = 14, 24  # head series truncation; remainder < 1e-18 since c(1+|z|) <= 1


def _h(a: np.ndarray, z: np.ndarray, t: np.ndarray) -> np.ndarray:
    return a * np.log(t) - 0.5 * t * t - z * t


def _log_head(a: np.ndarray, z: np.ndarray, c: np.ndarray) -> np.ndarray:
    """log int_0^c t^a e^{-t^2/2 - zt} dt as an exact double series.

    Valid because c <= 1/(1+|z|) keeps |zt| <= 1 and t^2/2 <= 1/2 on the
    head, so the exponential's expansion converges factorially.
    """
    base_j = np.multiply.accumulate(
        np.concatenate([[np.ones_like(c)], [-0.5 * c * c / j for j in range(1, _NJ)]]), axis=0
    )
    base_k = np.multiply.accumulate(
        np.concatenate([[np.ones_like(c)], [-c * z / k for k in range(1, _NK)]]), axis=0
    )
    jj = 2 * np.arange(_NJ)[:, None, None]
    kk = np.arange(_NK)[None, :, None]
    denom = 1.0 / (a[None, None, :] + 1.0 + jj + kk)
    s = np.einsum("jn,kn,jkn->n", base_j, base_k, denom)
    if np.any(s <= 0):
        raise NumericError("head series lost positivity (bad split point)")
    return (a + 1.0) * np.log(c) + np.log(s)


def _log_tail(a: np.ndarray, z: np.ndarray, c: np.ndarray) -> np.ndarray:
    """log int_c^inf t^a e^{-t^2/2 - zt} dt via peak-adapted panels."""
    disc = z * z + 4.0 * a
    t_star = 0.5 * (-z + np.sqrt(np.maximum(disc, 0.0)))
    interior = (disc >= 0.0) & (t_star > c)
    t_star = np.where(interior, t_star, c)
    h_star = np.where(interior, _h(a, z, np.maximum(t_star, 1e-300)), -np.inf)
    h_c = _h(a, z, c)
    t_peak = np.where(h_star >= h_c, t_star, c)
    h_peak = np.maximum(h_star, h_c)
    target = h_peak - _DROP

    # cutoffs where the integrand drops by e^-_DROP; 22 bisection steps
    # locate them to ~1e-6 of the bracket, far finer than panels need
    lo_t, hi_t = t_peak.copy(), t_peak + 40.0
    for _ in range(22):
        mid = 0.5 * (lo_t + hi_t)
        high = _h(a, z, mid) > target
        lo_t = np.where(high, mid, lo_t)
        hi_t = np.where(high, hi_t, mid)
    t_hi = hi_t
    lo_t, hi_t = c.copy(), t_peak.copy()
    for _ in range(22):
        mid = 0.5 * (lo_t + hi_t)
        low = _h(a, z, np.maximum(mid, 1e-300)) < target
        lo_t = np.where(low, mid, lo_t)
        hi_t = np.where(low, hi_t, mid)
    t_lo = np.where(h_c > target, c, lo_t)

    curv = np.abs(a / (t_peak * t_peak) + 1.0)
    slope = np.abs(a / t_peak - t_peak - z)
    sigma = np.minimum(1.0, np.minimum(1.0 / np.sqrt(1.0 + curv), 1.0 / np.maximum(1.0, slope)))
    sigma = np.maximum(sigma, (t_hi - t_peak) / _OMAX)
    sigma = np.maximum(sigma, (t_peak - t_lo) / _OMAX)

    off = sigma[:, None] * _OFFSETS[None, :]
    breaks = np.concatenate([t_peak[:, None] - off[:, :0:-1], t_peak[:, None] + off], axis=1)
    breaks = np.clip(breaks, t_lo[:, None], t_hi[:, None])
    lo = breaks[:, :-1]
    width = np.diff(breaks, axis=1)
    nodes = lo[:, :, None] + 0.5 * width[:, :, None] * (1.0 + _GLX[None, None, :])
    hv = _h(a[:, None, None], z[:, None, None], np.maximum(nodes, 1e-300)) - h_peak[:, None, None]
    total = np.einsum("pjn,pj,n->p", np.exp(hv), 0.5 * width, _GLW)
    if np.any(~np.isfinite(total)) or np.any(total <= 0):
        raise NumericError("tail quadrature failed (non-finite or non-positive)")
    return h_peak + np.log(total)


def _log_integral(a: np.ndarray, z: np.ndarray) -> np.ndarray:
    """log I(a, z) elementwise; a may vary per element (all a > -1)."""
    c = np.minimum(1.0, 1.0 / (1.0 + np.abs(z)))
    return np.logaddexp(_log_head(a, z, c), _log_tail(a, z, c))


def log_pcfd_pair(nu: float, z) -> tuple[np.ndarray, np.ndarray]:
    """(log D_nu(z), log D_{nu-1}(z)) elementwise over z, for nu <= 0.

    D_nu(z) > 0 for nu <= 0 and real z, so the logs are real.
    """
    if nu > 0:
        raise ValueError("log_pcfd_pair requires nu <= 0")
    z = np.atleast_1d(np.asarray(z, dtype=float))
    n = z.size
    quarter = -0.25 * z * z
    if nu == 0.0:
        bot = quarter - gammaln(1.0 - nu) + _log_integral(np.full(n, -nu), z)
        return quarter, bot
    # one stacked evaluation for both orders
    a2 = np.concatenate([np.full(n, -nu - 1.0), np.full(n, -nu)])
    z2 = np.concatenate([z, z])
    li = _log_integral(a2, z2)
    top = quarter - gammaln(-nu) + li[:n]
    bot = quarter - gammaln(1.0 - nu) + li[n:]
    return top, bot


def log_pcfd(nu: float, z) -> np.ndarray:
    """log D_nu(z) for nu <= 0, elementwise over z."""
    return log_pcfd_pair(nu, z)[0]


def dlog_pcfd(nu: float, z) -> np.ndarray:
    """d/dz log D_nu(z), from D_nu'(z) = nu D_{nu-1}(z) - (z/2) D_nu(z)."""
    z = np.atleast_1d(np.asarray(z, dtype=float))
    log_top, log_bot = log_pcfd_pair(nu, z)
    return nu * np.exp(log_bot - log_top) - 0.5 * z
