"""Exception and warning classes shared across the package."""


class PartitionForceError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(PartitionForceError, ValueError):
    """An argument lies outside the domain where the operation is defined."""


class OverflowDomain(PartitionForceError, OverflowError):
    """A result magnitude exceeds the double-precision range."""


class ConvergenceError(PartitionForceError, RuntimeError):
    """A series or iteration failed to reach its tolerance within the cap."""


class PoleError(PartitionForceError, ArithmeticError):
    """A rational approximant was evaluated at or beyond its pole."""


class FitError(PartitionForceError, RuntimeError):
    """No root or minimum was found inside the search window."""


class BracketError(PartitionForceError, RuntimeError):
    """The shooting function has no sign change in the scanned window."""


class StiffnessError(PartitionForceError, RuntimeError):
    """The adaptive ODE integrator failed its step-size control."""


class VerificationFailure(PartitionForceError, AssertionError):
    """A numerical verification exceeded its tolerance.

    ``failures`` lists the offending level indices.
    """

    def __init__(self, message, failures=()):
        super().__init__(message)
        self.failures = tuple(failures)


class RegimeWarning(UserWarning):
    """A closed-form approximation was evaluated outside its intended regime."""
