"""Exception hierarchy.

Two families matter to callers: ``ValidationError`` for bad input data or
configuration and ``ComputationError`` for failures inside a calculation.
The CLI maps them to distinct exit codes.
"""

from __future__ import annotations


class AgPriceError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(AgPriceError, ValueError):
    pass


class ComputationError(AgPriceError, ArithmeticError):
    pass


class ParseError(ValidationError):
    def __init__(self, path, line: int | None, message: str) -> None:
        self.path = str(path)
        self.line = line
        where = self.path if line is None else f"{self.path}:{line}"
        super().__init__(f"{where}: {message}")


# -- panel / data model ------------------------------------------------------

class _CellError(ValidationError):
    reason = "invalid cell"

    def __init__(self, item: str, year: int | None = None, detail: str = "") -> None:
        self.item = item
        self.year = year
        msg = f"{self.reason} at item={item!r}"
        if year is not None:
            msg += f", year={year}"
        super().__init__(f"{msg}: {detail}" if detail else msg)


class MissingCell(_CellError):
    reason = "missing cell"


class DuplicateCell(_CellError):
    reason = "duplicate cell"


class NonPositivePrice(_CellError):
    reason = "price must be > 0"


class NegativeQuantity(_CellError):
    reason = "quantity must be >= 0"


class TooFewYears(ValidationError):
    pass


class YearNotInPanel(ValidationError):
    pass


class ZeroAggregate(ValidationError):
    pass


class InvalidShares(ValidationError):
    pass


# -- index numbers -----------------------------------------------------------

class YearPairInvalid(ComputationError):
    pass


class UndefinedRatio(ComputationError):
    pass


class NonPositiveGrowth(ComputationError):
    pass


class EmptyLinks(ComputationError):
    pass


# -- translog ----------------------------------------------------------------

class InsufficientObservations(ComputationError):
    pass


class SingularSystem(ComputationError):
    pass


class NumeraireNotFound(ValidationError):
    pass


class NonPositiveOutput(ValidationError):
    pass


class ConstraintViolation(ValidationError):
    pass


class NotConvergedWarning(RuntimeWarning):
    """Iterated GLS hit its iteration cap; the best iterate is returned."""


# -- elasticities / policy ---------------------------------------------------

class ZeroShare(ComputationError):
    pass


class EmptyContributions(ComputationError):
    pass


class InvalidBounds(ValidationError):
    pass


class NonPositiveMsp(ValidationError):
    pass


class NonPositiveCost(ValidationError):
    pass


class NonPositiveTarget(ValidationError):
    pass


class MissingElasticity(ValidationError):
    pass
