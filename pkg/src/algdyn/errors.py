"""Exception hierarchy shared by all modules."""


class AlgDynError(Exception):
    """Base class for domain errors (the CLI maps these to exit code 1)."""


class DimensionMismatch(AlgDynError, ValueError):
    pass


class ZeroElementError(AlgDynError, ValueError):
    pass


class WindowTooSmall(AlgDynError, ValueError):
    pass


class PreconditionError(AlgDynError, ValueError):
    pass


class NotLopsided(PreconditionError):
    pass


class NotWellBalanced(PreconditionError):
    pass


class CertificateUnavailable(AlgDynError):
    """No inversion path could certify weak expansivity (or the zero scan was inconclusive)."""


class TheoremViolation(AlgDynError):
    """Surjectivity and pre-injectivity predicates disagreed.

    Under the recorded assumptions this must never happen; the exception
    carries the full state so the failure can be reproduced.
    """

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state or {}


class ParseError(AlgDynError, ValueError):
    pass


class WitnessValidationError(AlgDynError):
    """A witness failed its numerical validation at the requested tolerance."""
