"""Diffusion models on an open interval (l, u), u = +inf, l in {0, -inf}.

Each model knows its drift and volatility, the scale and speed densities

    S'(x) = exp(-int 2 mu / sigma^2),   m'(x) = 2 / (sigma^2 S'(x)),

and how to construct the increasing/decreasing solutions (psi_s, phi_s) of
A f = s f. Everything is exposed on a log scale so that large rates never
leave double precision.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ConfigError, NumericError


class DiffusionModel:
    """Base class; subclasses fill in coefficients and fundamental pairs."""

    kind = "generic"

    def __init__(self, lower: float, x_ref: float):
        if not (lower == 0.0 or lower == -math.inf):
            raise ConfigError("lower boundary must be 0 or -inf")
        self.lower = float(lower)
        self.upper = math.inf
        self.x_ref = float(x_ref)
        self._pairs: dict[float, object] = {}
        # recurrent: True/False when known in closed form, None = decide by audit
        self.recurrent: bool | None = None

    # -- coefficients -------------------------------------------------
    def drift(self, x):
        raise NotImplementedError

    def sigma(self, x):
        raise NotImplementedError

    def log_scale_density(self, x):
        """ln S'(x)."""
        raise NotImplementedError

    def log_speed_density(self, x):
        x = np.asarray(x, dtype=float)
        return math.log(2.0) - 2.0 * np.log(self.sigma(x)) - self.log_scale_density(x)

    # -- evaluation span ----------------------------------------------
    @property
    def span(self) -> tuple[float, float]:
        """Interval on which fundamental pairs can be evaluated."""
        return (self.lower, self.upper)

    # -- fundamental solutions ----------------------------------------
    def fundamental_pair(self, s: float):
        s = float(s)
        if s <= 0:
            raise ConfigError("fundamental pair needs rate s > 0")
        if s not in self._pairs:
            self._pairs[s] = self._make_pair(s)
        return self._pairs[s]

    def _make_pair(self, s: float):
        raise NotImplementedError

    def describe(self) -> dict:
        return {"kind": self.kind, "lower": self.lower}


class BrownianMotion(DiffusionModel):
    """dX = mu dt + sigma dW on the whole line."""

    kind = "bm"

    def __init__(self, mu: float = 0.0, sigma: float = 1.0):
        super().__init__(lower=-math.inf, x_ref=0.0)
        if sigma <= 0:
            raise ConfigError("sigma must be positive")
        self.mu = float(mu)
        self.sigma0 = float(sigma)
        self.recurrent = self.mu == 0.0

    def drift(self, x):
        return np.full_like(np.asarray(x, dtype=float), self.mu)

    def sigma(self, x):
        return np.full_like(np.asarray(x, dtype=float), self.sigma0)

    def log_scale_density(self, x):
        return -2.0 * self.mu / self.sigma0**2 * np.asarray(x, dtype=float)

    def alpha(self, s: float) -> tuple[float, float]:
        """Exponents of psi_s = e^{a+ x} and phi_s = e^{a- x}."""
        root = math.sqrt(self.mu**2 + 2.0 * s * self.sigma0**2)
        return (-self.mu + root) / self.sigma0**2, (-self.mu - root) / self.sigma0**2

    def _make_pair(self, s: float):
        from .fundamental import FundamentalPair

        ap, am = self.alpha(s)
        return FundamentalPair(
            model=self,
            s=s,
            logpsi=lambda x: ap * np.asarray(x, dtype=float),
            dlogpsi=lambda x: np.full_like(np.asarray(x, dtype=float), ap),
            logphi=lambda x: am * np.asarray(x, dtype=float),
            dlogphi=lambda x: np.full_like(np.asarray(x, dtype=float), am),
        )

    def describe(self):
        return {"kind": self.kind, "mu": self.mu, "sigma": self.sigma0}


class OrnsteinUhlenbeck(DiffusionModel):
    """dX = -kappa X dt + sigma dW, kappa > 0; positively recurrent."""

    kind = "ou"

    def __init__(self, kappa: float = 1.0, sigma: float = 1.0):
        super().__init__(lower=-math.inf, x_ref=0.0)
        if kappa <= 0 or sigma <= 0:
            raise ConfigError("kappa and sigma must be positive")
        self.kappa = float(kappa)
        self.sigma0 = float(sigma)
        self.recurrent = True

    def drift(self, x):
        return -self.kappa * np.asarray(x, dtype=float)

    def sigma(self, x):
        return np.full_like(np.asarray(x, dtype=float), self.sigma0)

    def log_scale_density(self, x):
        x = np.asarray(x, dtype=float)
        return self.kappa * x * x / self.sigma0**2

    def _make_pair(self, s: float):
        from .fundamental import FundamentalPair
        from .pcf import log_pcfd_pair

        kap, sg = self.kappa, self.sigma0
        nu = -s / kap
        c = math.sqrt(2.0 * kap) / sg

        def _logd_and_ratio(z):
            lt, lb = log_pcfd_pair(nu, z)
            return lt, nu * np.exp(lb - lt) - 0.5 * z

        def logpsi(x):
            x = np.asarray(x, dtype=float)
            return 0.5 * kap * x * x / sg**2 + log_pcfd_pair(nu, -c * x)[0]

        def dlogpsi(x):
            x = np.asarray(x, dtype=float)
            _, dl = _logd_and_ratio(-c * x)
            return kap * x / sg**2 - c * dl

        def logphi(x):
            x = np.asarray(x, dtype=float)
            return 0.5 * kap * x * x / sg**2 + log_pcfd_pair(nu, c * x)[0]

        def dlogphi(x):
            x = np.asarray(x, dtype=float)
            _, dl = _logd_and_ratio(c * x)
            return kap * x / sg**2 + c * dl

        return FundamentalPair(
            model=self, s=s, logpsi=logpsi, dlogpsi=dlogpsi, logphi=logphi, dlogphi=dlogphi
        )

    def describe(self):
        return {"kind": self.kind, "kappa": self.kappa, "sigma": self.sigma0}


class GenericDiffusion(DiffusionModel):
    """User-specified drift/volatility; fundamental pairs come from an ODE.

    Pairs and coefficients are only evaluated on the working interval
    [span_lo, span_hi]; integrals over unbounded regions are truncated
    there, with a decay check at the cut.
    """

    kind = "generic"

    def __init__(
        self,
        drift,
        sigma,
        lower: float = -math.inf,
        working_interval: tuple[float, float] = (-30.0, 30.0),
        x_ref: float | None = None,
    ):
        lo, hi = float(working_interval[0]), float(working_interval[1])
        if not (lo < hi):
            raise ConfigError("working interval must be increasing")
        if lower == 0.0 and lo <= 0.0:
            raise ConfigError("working interval must sit inside (0, inf) when lower=0")
        super().__init__(lower=lower, x_ref=0.5 * (lo + hi) if x_ref is None else x_ref)
        self._drift = drift
        self._sigma = sigma
        self._span = (lo, hi)
        probe = np.linspace(lo, hi, 97)
        sg = np.asarray(sigma(probe), dtype=float)
        if sg.shape != probe.shape or np.any(~np.isfinite(sg)) or np.any(sg <= 0):
            raise ConfigError("sigma must be positive and finite on the working interval")
        mu = np.asarray(drift(probe), dtype=float)
        if mu.shape != probe.shape or np.any(~np.isfinite(mu)):
            raise ConfigError("drift must be finite on the working interval")
        self._scale_interp = None

    def drift(self, x):
        return np.asarray(self._drift(np.asarray(x, dtype=float)), dtype=float)

    def sigma(self, x):
        return np.asarray(self._sigma(np.asarray(x, dtype=float)), dtype=float)

    @property
    def span(self):
        return self._span

    def _check_span(self, x):
        lo, hi = self._span
        if np.any(x < lo - 1e-9) or np.any(x > hi + 1e-9):
            raise NumericError(
                f"evaluation outside working interval [{lo}, {hi}]; widen it"
            )

    def log_scale_density(self, x):
        x = np.asarray(x, dtype=float)
        self._check_span(x)
        if self._scale_interp is None:
            from .fundamental import cumulative_interpolant

            self._scale_interp = cumulative_interpolant(
                lambda t: -2.0 * self.drift(t) / self.sigma(t) ** 2,
                self.x_ref,
                self._span,
            )
        return self._scale_interp(x)

    def _make_pair(self, s: float):
        from .fundamental import generic_pair

        return generic_pair(self, s)

    def describe(self):
        return {"kind": self.kind, "lower": self.lower, "working_interval": list(self._span)}
