"""Exception hierarchy shared by every module of the package."""


class SmoothRenyiError(Exception):
    """Base class for all package errors."""


class ValidationError(SmoothRenyiError, ValueError):
    """Input does not satisfy a documented precondition."""


class NegativeEntry(ValidationError):
    pass


class MassDeviationTooLarge(ValidationError):
    pass


class ZeroMarginal(ValidationError):
    pass


class AlphabetMismatch(ValidationError):
    pass


class MalformedBitstring(ValidationError):
    pass


class BudgetError(SmoothRenyiError):
    """A computation would exceed its configured size budget."""


class BlockTooLarge(BudgetError):
    pass


class InstanceTooLarge(BudgetError):
    pass
