"""Exception taxonomy for zollforge.

Every failure mode raised by the library derives from ZollforgeError so
callers can catch one type at the CLI boundary and map it to an exit code.
"""


class ZollforgeError(Exception):
    """Base class for all zollforge errors."""


class ConfigurationError(ZollforgeError):
    """Invalid configuration value (resolution, truncation, tolerance, ...)."""


class DomainError(ZollforgeError):
    """Input outside the mathematical domain of an operation."""


class GraphValidityError(DomainError):
    """A tangent field leaves the graph regime |phi| < pi/2."""


class SingularityError(ZollforgeError):
    """A quantity that must stay bounded away from zero degenerated."""


class SolvabilityError(ZollforgeError):
    """Right-hand side violates a solvability (orthogonality) constraint."""


class InvertibilityError(ZollforgeError):
    """A linear system is too ill-conditioned to invert reliably."""


class NonConvergenceError(ZollforgeError):
    """An iteration failed to reach its tolerance.

    Carries the residual trace so callers can report diagnostics.
    """

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = list(trace) if trace is not None else []


class NumericalError(ZollforgeError):
    """A numerical consistency check failed (NaN, overflow, lost digits)."""


class CatalogIntegrityError(ZollforgeError):
    """A symmetry-catalog entry failed one of its verification gates."""
