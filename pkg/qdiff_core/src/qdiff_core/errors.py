"""Exception hierarchy shared by every qmoduli package.

Validation problems (bad input, out-of-domain parameters) derive from
``ValueError`` and map to exit code 2; numerical failures (non-convergence,
broken internal identities) derive from ``RuntimeError`` and map to exit code 3.
"""

from typing import Any, Optional


class QModuliError(Exception):
    """Base class for all qmoduli errors."""

    exit_code = 1


class ValidationError(QModuliError, ValueError):
    """Input or configuration rejected before any computation."""

    exit_code = 2


class DomainError(ValidationError):
    """An operation was asked for outside its mathematical domain."""


class WindowUnderflowError(DomainError):
    """A truncation window became empty or lost the exponent 0."""


class ConditioningError(DomainError):
    """A multiplier scalar lies outside the conditioning annulus for its degree."""


class InvalidSectionError(DomainError):
    """A claimed global section fails its functional equation."""


class InvalidCovectorError(DomainError):
    """A theta covector is not admissible at the given extension class."""


class NumericalError(QModuliError, RuntimeError):
    """A computation ran but its result cannot be trusted."""

    exit_code = 3


class SingularMultiplierError(NumericalError):
    """A multiplier is not invertible in truncated arithmetic."""


class InternalConsistencyError(NumericalError):
    """An identity that must hold by construction was violated."""


class NonConvergenceError(NumericalError):
    """A search or refinement finished without a decisive answer."""

    def __init__(self, message: str, best_candidate: Optional[Any] = None) -> None:
        super().__init__(message)
        self.best_candidate = best_candidate


class ComparisonFailureError(NumericalError):
    """Two bracket constructions disagree by more than a constant factor."""

    def __init__(self, message: str, ratios: Optional[Any] = None) -> None:
        super().__init__(message)
        self.ratios = ratios
