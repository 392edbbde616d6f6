"""Provider for metric values computed outside the toolkit."""
from __future__ import annotations

import logging
from collections.abc import Sequence

from ..exceptions import DataError
from ..textmetrics import ScoredRow
from .base import BaseMetricProvider

_LOGGER = logging.getLogger(__name__)


class ImportedMetricProvider(BaseMetricProvider):
    """Reads one external metric column, such as METEOR or COMET."""

    def __init__(self, column: str) -> None:
        """Initialize the provider."""
        self.column = column

    @property
    def metric_name(self) -> str:
        """Return the metric name."""
        return self.column

    def sentence_scores(self, rows: Sequence[ScoredRow]) -> list[float]:
        """Return the imported value per row."""
        scores = []
        for row in rows:
            if self.column not in row.external:
                raise DataError(f"Row {row.id!r} has no {self.column} value")
            scores.append(row.external[self.column])
        _LOGGER.debug("Imported %d %s values", len(scores), self.column)
        return scores
