"""Optimal control of one-dimensional diffusions with costly downward pushes.

Four related problems on the same model family: push instantaneously
(singular control) or only at Poisson opportunity times (constrained
control), each under either discounting or the long-run average
criterion.  The package computes optimal thresholds and value functions,
verifies the connecting identities, demonstrates the large-rate and
vanishing-discount limits, and cross-checks everything by simulation.
"""

from __future__ import annotations

from .asymptotics import (
    SweepResult,
    feller_approx_report,
    functional_limit_report,
    sweep_discount,
    sweep_lambda,
)
from .audit import AuditReport, audit_discounted, audit_ergodic, recurrence_check
from .config import ExperimentConfig, load_config, parse_config
from .errors import (
    ConfigError,
    DiffctrlError,
    DivergenceError,
    NoRootError,
    NumericError,
    PreconditionError,
)
from .functionals import (
    functional_H,
    functional_K,
    functional_L,
    mass_identity_residuals,
    resolvent,
    resolvent_identity_residuals,
)
from .models import BrownianMotion, GenericDiffusion, OrnsteinUhlenbeck
from .problems import CostFunction, ProblemSpec
from .quadrature import SOLVER_CONFIG, QuadratureConfig
from .sim import (
    CostEstimate,
    SimConfig,
    active_backend,
    corrected_barrier,
    estimate_cost,
    extrapolate_dt,
    simulate_constrained,
    simulate_reflected,
)
from .solvers import (
    Solution,
    solve_constrained_discounted,
    solve_constrained_ergodic,
    solve_singular_discounted,
    solve_singular_ergodic,
)

__version__ = "0.1.0"

__all__ = [
    "AuditReport",
    "BrownianMotion",
    "ConfigError",
    "CostEstimate",
    "CostFunction",
    "DiffctrlError",
    "DivergenceError",
    "ExperimentConfig",
    "GenericDiffusion",
    "NoRootError",
    "NumericError",
    "OrnsteinUhlenbeck",
    "PreconditionError",
    "ProblemSpec",
    "QuadratureConfig",
    "SOLVER_CONFIG",
    "SimConfig",
    "Solution",
    "SweepResult",
    "active_backend",
    "audit_discounted",
    "audit_ergodic",
    "corrected_barrier",
    "estimate_cost",
    "extrapolate_dt",
    "feller_approx_report",
    "functional_H",
    "functional_K",
    "functional_L",
    "functional_limit_report",
    "load_config",
    "mass_identity_residuals",
    "parse_config",
    "recurrence_check",
    "resolvent",
    "resolvent_identity_residuals",
    "simulate_constrained",
    "simulate_reflected",
    "solve_constrained_discounted",
    "solve_constrained_ergodic",
    "solve_singular_discounted",
    "solve_singular_ergodic",
    "sweep_discount",
    "sweep_lambda",
    "__version__",
]
