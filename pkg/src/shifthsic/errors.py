"""Exception hierarchy shared by every module of the package."""


class HsicError(Exception):
    """Base class for all errors raised by shifthsic."""


class InvalidInput(HsicError, ValueError):
    """Input values are malformed (non-finite, wrong shape, bad parameter)."""


class DegenerateSeries(HsicError, ValueError):
    """A series carries no variation, so the requested quantity is undefined."""


class TooLarge(HsicError, ValueError):
    pass


class InvalidShift(HsicError, ValueError):
    pass


class GeneratorStall(HsicError, RuntimeError):
    """Rejection sampler exceeded its iteration cap."""


class NonStationary(HsicError, ValueError):
    pass


class ParseError(HsicError, ValueError):
    """A CSV row could not be parsed. ``line`` is 1-based."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class OrderError(HsicError, ValueError):
    pass


class EmptyInput(HsicError, ValueError):
    pass


class TooShort(HsicError, ValueError):
    pass


class NoOverlap(HsicError, ValueError):
    pass


class SingularDesign(HsicError, ValueError):
    pass


class SpecError(HsicError, ValueError):
    """An experiment spec failed validation; ``field`` names the culprit."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")
