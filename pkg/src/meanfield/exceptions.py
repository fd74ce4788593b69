"""Error types raised across the package."""


class MeanFieldError(Exception):
    """Base class for all package errors."""


class DomainError(MeanFieldError, ValueError):
    """A function was evaluated where it is not finite."""


class OrderError(MeanFieldError, ValueError):
    """A derivative above the declared order was requested."""


class KinkError(MeanFieldError, ValueError):
    """A one-sided derivative is needed but no side was given."""


class ClassificationError(MeanFieldError):
    """A stationary point could not be classified as a regular maximizer."""


class HypothesisViolation(MeanFieldError):
    """The landscape does not meet the assumptions of the MLE limit theorem."""


class UnbracketableError(MeanFieldError):
    """The observed statistic lies outside the attainable range of u(beta)."""

    def __init__(self, message, target=None, attainable=None):
        super().__init__(message)
        self.target = target
        self.attainable = attainable


class EmptyWindowError(MeanFieldError, ValueError):
    """A window contains no lattice points."""


class KinkDiagnostic(ClassificationError):
    """A maximizer sits on a kink whose one-sided classifications disagree."""

    def __init__(self, message, point=None, left=None, right=None):
        super().__init__(message)
        self.point = point
        self.left = left
        self.right = right
