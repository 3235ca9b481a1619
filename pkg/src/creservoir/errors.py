"""Exception types shared across the package."""


class DomainError(ValueError):
    """Input outside the mathematical domain of an operation."""


class ParseError(ValueError):
    """Malformed input file (FCIDUMP namelist, metadata sidecar, checkpoint)."""


class ConsistencyError(ValueError):
    """Duplicate records that disagree beyond tolerance."""


class ConvergenceError(RuntimeError):
    """Iterative solver failed to converge within its iteration cap.

    Carries the best residual norms reached so callers can report them.
    """

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals


class InsufficientStates(RuntimeError):
    """Not enough computed states to answer the query (raise k and retry)."""
