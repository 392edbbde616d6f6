"""Errors raised by the DRS toolkit."""
from __future__ import annotations

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from .graph import IllFormedReport


class DrsToolkitError(Exception):
    """Base error for the toolkit."""


class ConfigError(DrsToolkitError):
    """Error to indicate invalid configuration or flags."""


class DataError(DrsToolkitError):
    """Error to indicate invalid input data."""


class LexError(DataError):
    """Error to indicate a line could not be lexed."""

    INVALID_TOKEN = "InvalidToken"
    EMPTY_LINE = "EmptyLine"

    def __init__(
        self,
        category: str,
        position: int = -1,
        surface: str = "",
        fields: tuple[str, ...] = (),
    ) -> None:
        """Initialize the error."""
        self.category = category
        self.position = position
        self.surface = surface
        self.fields = fields
        if category == self.EMPTY_LINE:
            message = "EmptyLine"
        else:
            message = f"{category} at field {position}: {surface!r}"
        super().__init__(message)


class IllFormedError(DataError):
    """Error to indicate a sequence cannot be converted into a graph."""

    def __init__(self, report: IllFormedReport) -> None:
        """Initialize the error."""
        self.report = report
        super().__init__(f"{report.category} at {report.position}: {report.detail}")


class GraphInvariantError(DrsToolkitError):
    """Error to indicate a graph violates a structural invariant."""


class EmptyInputError(DataError):
    """Error to indicate an operation received no input."""


class MisalignedFilesError(DataError):
    """Error to indicate paired files have different line counts."""


class UnknownLanguageError(DataError):
    """Error to indicate an unsupported language code."""


class MissingSplitError(DataError):
    """Error to indicate half of a text/DRS file pair is missing."""


class OracleBoundError(DrsToolkitError):
    """Error to indicate an instance is too large for exhaustive matching."""


class DegenerateGroupsError(DataError):
    """Error to indicate a label class is empty."""


class ZeroVarianceError(DataError):
    """Error to indicate metric values are constant."""
