"""Error vocabulary shared by every module.

Each error carries the process exit code the command line maps it to:
0 ok, 2 precision, 3 budget, 4 hypothesis violation, 5 config.
"""

from __future__ import annotations


class UnimodalError(Exception):
    exit_code = 1


class PrecisionExhausted(UnimodalError):
    """A certified decision could not be reached at the maximum precision."""

    exit_code = 2


class Undecided(PrecisionExhausted):
    """A comparison was undecided at the current precision."""


class BudgetExceeded(UnimodalError):
    exit_code = 3


class HorizonExceeded(BudgetExceeded):
    """An index beyond the computed orbit was needed."""


class BranchBudgetExceeded(BudgetExceeded):
    pass


class NotFound(BudgetExceeded):
    """A search exhausted its budget without a certified answer."""


class HypothesisViolation(UnimodalError):
    exit_code = 4

    def __init__(self, message: str, condition: str | None = None, point: object = None):
        super().__init__(message)
        self.condition = condition
        self.point = point


class RenormalizationDetected(HypothesisViolation):
    """The principal nest stopped shrinking: a restrictive interval was found."""

    def __init__(self, message: str, period: int, level: int):
        super().__init__(message, condition="non-renormalizable")
        self.period = period
        self.level = level


class SuperattractingParameter(HypothesisViolation):
    """The critical point is periodic; cutting times are not defined."""


class NotInDomain(HypothesisViolation):
    pass


class NoFixedPoint(UnimodalError):
    exit_code = 5


class NotACuttingSequence(UnimodalError):
    exit_code = 5


class ConfigError(UnimodalError):
    exit_code = 5


class InsufficientData(UnimodalError):
    """Too few points (or too narrow a range) for a growth fit."""

    exit_code = 5
