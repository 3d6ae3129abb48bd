"""Exception types shared by all modules; the CLI maps them to exit codes."""


class WeilformError(Exception):
    exit_code = 1


class ValidationError(WeilformError, ValueError):
    """Input data violating a documented precondition."""

    exit_code = 2


class BudgetExceeded(WeilformError):
    """An enumeration or linear-algebra budget would be exceeded."""

    exit_code = 3


class ConsistencyError(WeilformError):
    """An internal identity that must hold exactly failed."""

    exit_code = 4
