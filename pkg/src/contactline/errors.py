"""Exception hierarchy shared across the package.

Process exit codes used by the CLI:
    1 -> validation / parse errors
    2 -> numerical failures
    3 -> verification failures
"""


class ContactLineError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ValidationError(ContactLineError):
    """Bad argument, precondition violation, or malformed input."""

    exit_code = 1


class ParseError(ValidationError):
    """Malformed configuration or trace file."""


class NumericalFailureError(ContactLineError):
    """Singular system, overflow, or NaN during computation."""

    exit_code = 2


class DegenerateClosureError(NumericalFailureError):
    """The speed closure functional has no sensitivity to V."""


class ClosureFailureError(NumericalFailureError):
    """Scalar iteration for the speed closure did not converge."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class DomainTooShortError(ValidationError):
    """No sign change of the profile found; extend the integration domain."""


class CertificationFailureError(NumericalFailureError):
    """A sign certification of the self-similar profile failed."""


class ConstraintViolationError(NumericalFailureError):
    """A fitted parameter violates a hard model constraint."""


class VerificationFailureError(ContactLineError):
    """A named check of the verification suite failed."""

    exit_code = 3
