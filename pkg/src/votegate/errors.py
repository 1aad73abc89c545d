"""Exception types shared across the package."""


class VotegateError(Exception):
    """Base class for every error this package raises deliberately."""


class ParseError(VotegateError):
    """A record line could not be parsed.

    Carries the 1-based line number of the offending line when known.
    """

    def __init__(self, message, line_number=None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class ValidationError(VotegateError):
    """A value violates a structural invariant.

    Names the offending instance when one is known.
    """

    def __init__(self, message, instance_id=None):
        if instance_id is not None:
            message = f"instance {instance_id!r}: {message}"
        super().__init__(message)
        self.instance_id = instance_id


class RangeError(VotegateError):
    """A numeric argument is outside its documented range."""


class UnknownScore(VotegateError):
    """The requested score name is absent from a path's score map."""


class EmptyCalibration(VotegateError):
    """A calibration operation received zero outcomes."""


class LengthMismatch(VotegateError):
    """Two sequences that must align elementwise have different lengths."""


class DegenerateStratum(VotegateError):
    """All outcomes fall in one correctness stratum.

    Conditional quantities are undefined; the observed vote accuracy is
    still reported on the exception.
    """

    def __init__(self, message, p_v_hat=None):
        if p_v_hat is not None:
            message = f"{message} (observed vote accuracy {p_v_hat})"
        super().__init__(message)
        self.p_v_hat = p_v_hat


class EmptySelection(VotegateError):
    """No outcome exceeds the threshold; selective accuracy is undefined."""


class DomainError(VotegateError):
    """Inputs lie outside the mathematical domain of a formula."""


class EmptyInput(VotegateError):
    """An operation that needs at least one element received none."""


class InsufficientPoints(VotegateError):
    """Too few defined points to compute the requested summary."""


class SpecError(VotegateError):
    """A generator specification is internally inconsistent."""


class TooLarge(VotegateError):
    """An exact enumeration would exceed the safety guard."""


class NoClosedForm(VotegateError):
    """No exact result exists for this configuration; use Monte Carlo."""


class ConfigError(VotegateError):
    """An experiment configuration is missing or malformed."""
