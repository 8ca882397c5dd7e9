"""Exception hierarchy shared by every cibeam module."""


class CibeamError(Exception):
    """Base class for all library errors."""


class DomainError(CibeamError, ValueError):
    """Input lies outside the domain where a quantity is defined."""


class InvalidBeamError(DomainError):
    """Beam parameters fall outside every admissible case."""


class PoleError(DomainError):
    """Gamma function evaluated at a nonpositive integer."""


class DivergentSeriesError(DomainError):
    """A hypergeometric series does not converge for the given arguments."""


class DualNotConstructibleError(DomainError):
    """The symmetry image would need Im(q0) <= 0."""


class ExpansionInvalidError(DomainError):
    """Laguerre-Gauss expansion requested where it does not hold (q1 = q0*)."""


class UndefinedMomentError(DomainError):
    """Second moment of the intensity is infinite (power-law tail)."""


class NumericalError(CibeamError, ArithmeticError):
    """A numerical procedure failed to reach its tolerance."""


class ConvergenceError(NumericalError):
    """Series or iteration hit its term/iteration cap."""


class NoBracketError(NumericalError):
    """Root bracket could not be established."""


class FieldEvaluationError(NumericalError):
    """Field evaluation failed at a specific grid pixel."""

    def __init__(self, message, pixel=None):
        super().__init__(message)
        self.pixel = pixel
