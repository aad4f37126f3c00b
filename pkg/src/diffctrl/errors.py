"""Exception hierarchy.

Everything raised on purpose by this package derives from DiffctrlError so
callers (and the CLI) can map failures to exit codes without matching on
message text.
"""

from __future__ import annotations


class DiffctrlError(Exception):
    """Base class for all package errors."""


class ConfigError(DiffctrlError):
    """Malformed user input: config files, expressions, bad argument combos."""


class PreconditionError(DiffctrlError):
    """A standing assumption needed by the requested computation fails.

    Examples: ergodic problems on a transient diffusion, a payoff whose
    running cost is not eventually increasing, integrability failures found
    by the audit.
    """


class NumericError(DiffctrlError):
    """A numerical routine could not reach its target accuracy."""


class DivergenceError(NumericError):
    """An integral failed to converge on an unbounded domain.

    Carries enough context (which tail, last window contributions) to tell
    a genuinely divergent integral from a badly scaled one.
    """


class NoRootError(NumericError):
    """Bracket expansion exhausted without a sign change."""
