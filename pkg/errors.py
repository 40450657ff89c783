"""
Error types for credit-impact-bench
Every failure raised by the toolkit derives from ImpactError
"""

from typing import List, Optional, Sequence


class ImpactError(ValueError):
    """Base class for all toolkit errors"""


class ConfigError(ImpactError):
    """Invalid configuration (CLI exit code 2)"""


class ConvergenceWarning(UserWarning):
    """An iterative solver stopped at max_iter"""


class SeparationWarning(UserWarning):
    """Propensity weights grew past the configured bound"""


# --- data-model -------------------------------------------------------------

class NonFiniteValue(ImpactError):
    def __init__(self, row: int, column: str):
        self.row = row
        self.column = column
        super().__init__(f"non-finite value at row {row}, column '{column}'")


class UnknownTreatmentLabel(ImpactError):
    def __init__(self, row: int, label=None):
        self.row = row
        self.label = label
        super().__init__(f"unknown treatment label {label!r} at row {row}")


class ShapeMismatch(ImpactError):
    pass


class TableValidationError(ImpactError):
    """Several invariants failed at once; `errors` lists each one"""

    def __init__(self, errors: Sequence[ImpactError]):
        self.errors: List[ImpactError] = list(errors)
        lines = "\n".join(f"  - {e}" for e in self.errors)
        super().__init__(f"{len(self.errors)} table invariants violated:\n{lines}")


class DegenerateSplit(ImpactError):
    pass


# --- learners ---------------------------------------------------------------

class LevelMissingInTrain(ImpactError):
    def __init__(self, level: int):
        self.level = level
        super().__init__(f"treatment level {level} has no rows in the train split")


class SingularDesign(ImpactError):
    pass


class DimensionMismatch(ImpactError):
    def __init__(self, what: str, expected: int, got: int):
        self.expected = expected
        self.got = got
        super().__init__(f"{what}: expected {expected} columns, got {got}")


# --- estimators / scores ----------------------------------------------------

class EmptyTreatedGroup(ImpactError):
    def __init__(self, level: int):
        self.level = level
        super().__init__(f"no evaluation rows at treatment level {level}")


class DomainError(ImpactError):
    pass


class DegenerateSlope(ImpactError):
    pass


class InvalidPath(ImpactError):
    pass


# --- dgp --------------------------------------------------------------------

class FactorizationFailure(ImpactError):
    pass


class DegenerateScores(ImpactError):
    pass


# --- metrics ----------------------------------------------------------------

class AllTrueEffectsZero(ImpactError):
    pass


class NoValidTriples(ImpactError):
    pass


class DivisionByZeroErr(ImpactError, ZeroDivisionError):
    pass


class ZeroDenominator(ImpactError, ZeroDivisionError):
    pass


class InsufficientRepetitions(ImpactError):
    def __init__(self, needed: int, got: int, message: Optional[str] = None):
        self.needed = needed
        self.got = got
        super().__init__(message or f"need at least {needed} repetitions, got {got}")
