"""Exception hierarchy; each class carries the CLI exit status it maps to."""


class ConfdimError(Exception):
    exit_code = 4


class InputError(ConfdimError):
    """Malformed or out-of-contract input."""

    exit_code = 2


class ValidationError(InputError):
    """The generator spec fails a structural condition."""


class EmptyFamilyError(InputError):
    """The requested path family has no paths."""


class FamilyTooLargeError(ConfdimError):
    """An exhaustive enumeration would exceed its cap."""

    exit_code = 3


class BudgetError(ConfdimError):
    """A level or search exceeds the configured resource budget."""

    exit_code = 3


class ConvergenceError(ConfdimError):
    """An iterative solver hit its iteration cap."""

    exit_code = 4

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace or []


class ConsistencyError(ConfdimError):
    """Two computations that must agree did not."""

    exit_code = 4
