"""Sentence BLEU metric provider."""
from __future__ import annotations

from collections.abc import Sequence

from ..textmetrics import ScoredRow, sentence_bleu, tokenize
from .base import BaseMetricProvider


class BleuProvider(BaseMetricProvider):
    """Smoothed sentence BLEU against the reference."""

    @property
    def metric_name(self) -> str:
        """Return the metric name."""
        return "BLEU"

    def sentence_scores(self, rows: Sequence[ScoredRow]) -> list[float]:
        """Return sentence BLEU per row."""
        return [
            sentence_bleu(tokenize(row.hypothesis), tokenize(row.reference)).score
            for row in rows
        ]
