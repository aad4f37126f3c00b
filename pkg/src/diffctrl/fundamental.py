"""Fundamental solutions (psi_s, phi_s) of A f = s f in log scale.

psi_s is increasing, phi_s decreasing, both positive. A FundamentalPair
carries log psi, log phi and their x-derivatives; downstream formulas are
written in ratio form, so the absolute normalization of either function is
irrelevant (and at large s it would not even fit in a double). For
convenience psi/phi themselves are exposed normalized to 1 at the model's
reference point.

Generic models get their pair from the log-derivative Riccati equation

    w' = 2 (s - mu w) / sigma^2 - w^2,      w = f'/f,

integrated left-to-right (the increasing branch is attracting in that
direction) and right-to-left for the decreasing branch, with log f
accumulated alongside.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.integrate import solve_ivp

from .errors import NumericError


class FundamentalPair:
    """Increasing (psi) and decreasing (phi) s-harmonic functions."""

    def __init__(self, model, s, logpsi, dlogpsi, logphi, dlogphi):
        self.model = model
        self.s = float(s)
        self._logpsi = logpsi
        self._dlogpsi = dlogpsi
        self._logphi = logphi
        self._dlogphi = dlogphi
        ref = np.asarray([model.x_ref])
        self._off_psi = float(logpsi(ref)[0])
        self._off_phi = float(logphi(ref)[0])

    # raw logs (arbitrary additive normalization, stable at any s)
    # output shape mirrors input shape, so float() on a scalar call is safe
    def logpsi(self, x):
        x = np.asarray(x, dtype=float)
        return np.asarray(self._logpsi(np.atleast_1d(x))).reshape(x.shape)

    def logphi(self, x):
        x = np.asarray(x, dtype=float)
        return np.asarray(self._logphi(np.atleast_1d(x))).reshape(x.shape)

    def dlogpsi(self, x):
        x = np.asarray(x, dtype=float)
        return np.asarray(self._dlogpsi(np.atleast_1d(x))).reshape(x.shape)

    def dlogphi(self, x):
        x = np.asarray(x, dtype=float)
        return np.asarray(self._dlogphi(np.atleast_1d(x))).reshape(x.shape)

    # normalized values, psi(x_ref) = phi(x_ref) = 1
    def psi(self, x):
        return np.exp(self.logpsi(x) - self._off_psi)

    def phi(self, x):
        return np.exp(self.logphi(x) - self._off_phi)

    def psi_curvature(self, x):
        """psi''/psi via the defining equation."""
        x = np.asarray(x, dtype=float)
        mu = self.model.drift(x)
        sg = self.model.sigma(x)
        return 2.0 * (self.s - mu * self.dlogpsi(x)) / sg**2

    def phi_curvature(self, x):
        x = np.asarray(x, dtype=float)
        mu = self.model.drift(x)
        sg = self.model.sigma(x)
        return 2.0 * (self.s - mu * self.dlogphi(x)) / sg**2

    def wronskian_ratio(self, x):
        """B_s / (psi(x) phi(x)) = (logpsi' - logphi') / S'(x).

        The unnormalized Wronskian B_s is constant in x; this ratio is what
        ratio-form resolvent formulas actually need.
        """
        x = np.asarray(x, dtype=float)
        return (self.dlogpsi(x) - self.dlogphi(x)) * np.exp(
            -self.model.log_scale_density(x)
        )

    def rescaled(self, c_psi: float, c_phi: float) -> "FundamentalPair":
        """Pair with psi, phi multiplied by constants (for invariance tests)."""
        lp, lq = math.log(c_psi), math.log(c_phi)
        return FundamentalPair(
            model=self.model,
            s=self.s,
            logpsi=lambda x, f=self._logpsi: f(x) + lp,
            dlogpsi=self._dlogpsi,
            logphi=lambda x, f=self._logphi: f(x) + lq,
            dlogphi=self._dlogphi,
        )


def cumulative_interpolant(fn, x0: float, span: tuple[float, float]):
    """Dense antiderivative of fn on span, zero at x0, as a callable."""
    lo, hi = span
    sols = []
    for a, b in [(x0, hi), (x0, lo)]:
        if a == b:
            sols.append(None)
            continue
        sol = solve_ivp(
            lambda t, y: [float(fn(np.asarray([t]))[0])],
            (a, b),
            [0.0],
            method="LSODA",
            rtol=1e-11,
            atol=1e-13,
            dense_output=True,
        )
        if not sol.success:
            raise NumericError(f"antiderivative integration failed: {sol.message}")
        sols.append(sol.sol)

    def evaluate(x):
        x = np.asarray(x, dtype=float)
        out = np.empty_like(x)
        right = x >= x0
        if right.any():
            out[right] = sols[0](x[right])[0] if sols[0] is not None else 0.0
        if (~right).any():
            out[~right] = sols[1](x[~right])[0] if sols[1] is not None else 0.0
        return out

    return evaluate


def _riccati_sweep(model, s: float, start: float, stop: float, w0: float):
    """Integrate w' = 2(s - mu w)/sigma^2 - w^2 with log f alongside."""

    def rhs(t, y):
        ta = np.asarray([t])
        mu = float(model.drift(ta)[0])
        sg = float(model.sigma(ta)[0])
        w = y[0]
        return [2.0 * (s - mu * w) / sg**2 - w * w, w]

    sol = solve_ivp(
        rhs,
        (start, stop),
        [w0, 0.0],
        method="LSODA",
        rtol=1e-11,
        atol=1e-13,
        dense_output=True,
    )
    if not sol.success:
        raise NumericError(f"fundamental-solution sweep failed: {sol.message}")
    return sol.sol


def _branch_root(model, s: float, x: float, sign: float) -> float:
    """Frozen-coefficient root of the Riccati rhs, refined once for drift
    of the root itself (keeps the launch transient second order small)."""

    def root(t: float, wprime: float = 0.0) -> float:
        mu = float(model.drift(np.asarray([t]))[0])
        sg = float(model.sigma(np.asarray([t]))[0])
        disc = mu * mu + 2.0 * s * sg**2 - wprime * sg**4
        if disc <= 0:
            disc = mu * mu + 2.0 * s * sg**2
        return (-mu + sign * math.sqrt(disc)) / sg**2

    h = 1e-5 * max(1.0, abs(x))
    slope = (root(x + h) - root(x - h)) / (2.0 * h)
    return root(x, wprime=slope)


def generic_pair(model, s: float) -> FundamentalPair:
    lo, hi = model.span
    if not (np.isfinite(lo) and np.isfinite(hi)):
        raise NumericError("generic pairs need a finite working interval")
    psi_sol = _riccati_sweep(model, s, lo, hi, _branch_root(model, s, lo, +1.0))
    phi_sol = _riccati_sweep(model, s, hi, lo, _branch_root(model, s, hi, -1.0))

    probe = np.linspace(lo, hi, 257)
    wpsi = psi_sol(probe)[0]
    wphi = phi_sol(probe)[0]
    if np.any(wpsi <= 0):
        raise NumericError("increasing solution lost monotonicity; widen the interval")
    if np.any(wphi >= 0):
        raise NumericError("decreasing solution lost monotonicity; widen the interval")

    def _eval(sol, row):
        def f(x):
            x = np.asarray(x, dtype=float)
            model._check_span(x)
            return sol(np.clip(x, lo, hi))[row]

        return f

    return FundamentalPair(
        model=model,
        s=s,
        logpsi=_eval(psi_sol, 1),
        dlogpsi=_eval(psi_sol, 0),
        logphi=_eval(phi_sol, 1),
        dlogphi=_eval(phi_sol, 0),
    )
