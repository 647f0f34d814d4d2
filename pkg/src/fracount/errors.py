"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of the operation."""


class ConvergenceDomainError(ValueError):
    """The requested series evaluation lies outside its convergence domain."""


class TruncationError(RuntimeError):
    """A series failed to converge within the allowed number of terms."""


class EvaluationError(RuntimeError):
    """All evaluation paths failed; carries diagnostic context."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
