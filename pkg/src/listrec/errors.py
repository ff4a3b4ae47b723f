"""Exception types shared across the package."""


class ListRecError(Exception):
    """Base class for all package errors."""


class DivisionByZero(ListRecError, ZeroDivisionError):
    pass


class InvalidModulus(ListRecError, ValueError):
    pass


class InvalidElement(ListRecError, ValueError):
    pass


class IrreducibleSearchFailed(ListRecError):
    pass


class DimensionMismatch(ListRecError, ValueError):
    pass


class DegreeTooHigh(ListRecError, ValueError):
    pass


class UnderDetermined(ListRecError):
    pass


class NotClosed(ListRecError):
    pass


class ClosureViolation(ListRecError):
    pass


class RegimeViolation(ListRecError):
    pass


class AgreementTooLow(ListRecError):
    pass


class TableTooLarge(ListRecError):
    pass


class ConfigInvalid(ListRecError, ValueError):
    pass
