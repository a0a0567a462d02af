"""Exception types shared across the package.

The CLI maps these onto distinct exit codes, so solver code should raise
the most specific type that applies.
"""


class RenewalError(Exception):
    """Base class for all package errors."""


class ConfigError(RenewalError):
    """A configuration file or expression could not be parsed."""


class ContractError(RenewalError, ValueError):
    """An argument violates a documented precondition."""


class DomainError(RenewalError, ValueError):
    """A requested age or time lies outside the precomputed grids."""


class ConvergenceError(RenewalError, RuntimeError):
    """An iteration failed to reach its tolerance within the step budget.

    Under the documented window-length restriction the fixed-point
    iteration contracts geometrically, so seeing this usually means a
    grid was built inconsistently rather than that the tolerance is
    too tight.
    """


class InvariantViolation(RenewalError):
    """A verification run found a residual above its tolerance."""
