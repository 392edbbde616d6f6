"""Base metric provider for correlation analysis."""
from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from collections.abc import Sequence

from ..exceptions import DataError
from ..textmetrics import BiserialResult, ScoredRow, point_biserial

_LOGGER = logging.getLogger(__name__)


class BaseMetricProvider(ABC):
    """Base class for sentence-level metric providers."""

    @property
    @abstractmethod
    def metric_name(self) -> str:
        """Return the metric name."""

    @abstractmethod
    def sentence_scores(self, rows: Sequence[ScoredRow]) -> list[float]:
        """Return one score per row."""

    def correlate(self, rows: Sequence[ScoredRow]) -> BiserialResult:
        """Correlate the metric with the human labels of the rows."""
        unlabelled = [row.id for row in rows if row.label is None]
        if unlabelled:
            raise DataError(
                f"{len(unlabelled)} rows lack a human label, first is {unlabelled[0]!r}"
            )
        try:
            result = point_biserial(self.sentence_scores(rows), [row.label for row in rows])
        except DataError as err:
            _LOGGER.error("Correlation failed for %s: %s", self.metric_name, err)
            raise
        _LOGGER.debug("%s correlation r=%.4f p=%.4g", self.metric_name, result.r, result.p_value)
        return result
