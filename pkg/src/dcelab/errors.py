"""Exception and warning types shared by every dcelab module."""


class DceError(Exception):
    """Base class for dcelab errors."""


class DomainError(DceError, ValueError):
    """Input outside the physical or mathematical domain of an operation."""


class PreconditionError(DceError, ValueError):
    """A documented precondition of an operation does not hold."""


class NumericError(DceError, ArithmeticError):
    """A numerical procedure (root finder, quadrature, ODE solver) failed."""


class PhysicsWarning(UserWarning):
    """Inputs are accepted but sit outside the regime where the model is reliable."""
