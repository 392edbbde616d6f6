"""BLEU and point-biserial correlation for generation output."""
from __future__ import annotations

import csv
import logging
import math
import random
from collections import Counter
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
from scipy import stats

from .const import (
    BLEU_MAX_ORDER,
    DEFAULT_ANNOTATION_SAMPLE,
    DEFAULT_SEED,
    ERROR_DEGENERATE_GROUPS,
    ERROR_EMPTY_INPUT,
    ERROR_ZERO_VARIANCE,
)
from .exceptions import DataError, DegenerateGroupsError, EmptyInputError, ZeroVarianceError

_LOGGER = logging.getLogger(__name__)

# tolerance of the Pearson cross-check
_PEARSON_TOLERANCE = 1e-9


def tokenize(line: str) -> list[str]:
    """Split a line on whitespace."""
    return line.split()


def _ngrams(tokens: Sequence[str], order: int) -> Counter[tuple[str, ...]]:
    return Counter(tuple(tokens[i : i + order]) for i in range(len(tokens) - order + 1))


@dataclass(frozen=True)
class BleuScore:
    """Corpus or sentence BLEU with its components."""

    score: float
    precisions: tuple[float, ...]
    brevity_penalty: float
    hyp_len: int
    ref_len: int

    def to_dict(self) -> dict[str, Any]:
        """Return a JSON-serializable dict."""
        return {
            "bleu": self.score,
            "precisions": [100.0 * p for p in self.precisions],
            "brevity_penalty": self.brevity_penalty,
            "hyp_len": self.hyp_len,
            "ref_len": self.ref_len,
        }


@dataclass(frozen=True)
class BleuStats:
    """Clipped n-gram counts that can be summed across shards."""

    matches: tuple[int, ...] = (0,) * BLEU_MAX_ORDER
    totals: tuple[int, ...] = (0,) * BLEU_MAX_ORDER
    hyp_len: int = 0
    ref_len: int = 0

    def __add__(self, other: BleuStats) -> BleuStats:
        return BleuStats(
            tuple(a + b for a, b in zip(self.matches, other.matches)),
            tuple(a + b for a, b in zip(self.totals, other.totals)),
            self.hyp_len + other.hyp_len,
            self.ref_len + other.ref_len,
        )

    @classmethod
    def from_pair(cls, hypothesis: Sequence[str], reference: Sequence[str]) -> BleuStats:
        """Count clipped n-gram matches of one hypothesis."""
        matches, totals = [], []
        for order in range(1, BLEU_MAX_ORDER + 1):
            hyp_counts = _ngrams(hypothesis, order)
            clipped = hyp_counts & _ngrams(reference, order)
            matches.append(sum(clipped.values()))
            totals.append(max(0, len(hypothesis) - order + 1))
        return cls(tuple(matches), tuple(totals), len(hypothesis), len(reference))

    def score(self, smooth: bool = False) -> BleuScore:
        """Apply the BLEU formula, with add-one smoothing for n >= 2 if asked."""
        precisions = []
        for order, (match, total) in enumerate(zip(self.matches, self.totals), start=1):
            if smooth and order > 1:
                precisions.append((match + 1) / (total + 1))
            elif total:
                precisions.append(match / total)
            else:
                precisions.append(0.0)

        if self.hyp_len == 0:
            brevity_penalty = 0.0
        else:
            brevity_penalty = min(1.0, math.exp(1 - self.ref_len / self.hyp_len))

        # orders longer than every hypothesis have no n-grams to judge
        used = [p for p, total in zip(precisions, self.totals) if total or smooth]
        if not used or min(used) == 0.0:
            value = 0.0
        else:
            value = 100.0 * brevity_penalty * math.exp(sum(map(math.log, used)) / len(used))
        return BleuScore(value, tuple(precisions), brevity_penalty, self.hyp_len, self.ref_len)


def bleu_stats(
    hypotheses: Sequence[Sequence[str]], references: Sequence[Sequence[str]]
) -> BleuStats:
    """Sum BLEU statistics over a corpus."""
    if len(hypotheses) != len(references):
        raise DataError(
            f"{len(hypotheses)} hypotheses but {len(references)} references"
        )
    if not hypotheses:
        raise EmptyInputError(ERROR_EMPTY_INPUT)

    total = BleuStats()
    for line, (hypothesis, reference) in enumerate(zip(hypotheses, references), start=1):
        if not reference:
            raise DataError(f"Reference line {line} is empty")
        total = total + BleuStats.from_pair(hypothesis, reference)
    return total


def bleu(
    hypotheses: Sequence[Sequence[str]], references: Sequence[Sequence[str]]
) -> BleuScore:
    """Return unsmoothed corpus BLEU-4."""
    return bleu_stats(hypotheses, references).score()


def sentence_bleu(hypothesis: Sequence[str], reference: Sequence[str]) -> BleuScore:
    """Return add-one smoothed BLEU of one sentence."""
    return bleu_stats([hypothesis], [reference]).score(smooth=True)


@dataclass(frozen=True)
class BiserialResult:
    """Point-biserial correlation between metric values and 0/1 labels."""

    r: float
    n1: int
    n0: int
    mean1: float
    mean0: float
    std: float
    p_value: float = field(default=float("nan"))

    def to_dict(self) -> dict[str, Any]:
        """Return a JSON-serializable dict."""
        return {
            "r": self.r,
            "p_value": self.p_value,
            "n1": self.n1,
            "n0": self.n0,
            "mean1": self.mean1,
            "mean0": self.mean0,
            "std": self.std,
        }


def point_biserial(
    metric_values: Sequence[float], labels: Sequence[int]
) -> BiserialResult:
    """Correlate interval metric values with dichotomous labels."""
    if len(metric_values) != len(labels):
        raise DataError(f"{len(metric_values)} values but {len(labels)} labels")
    values = np.asarray(metric_values, dtype=float)
    groups = np.asarray(labels, dtype=int)
    if not np.isin(groups, (0, 1)).all():
        raise DataError("Labels must be 0 or 1")

    n1 = int(groups.sum())
    n0 = len(groups) - n1
    if n1 == 0 or n0 == 0:
        raise DegenerateGroupsError(f"{ERROR_DEGENERATE_GROUPS}: n1={n1}, n0={n0}")
    if np.ptp(values) == 0:
        raise ZeroVarianceError(ERROR_ZERO_VARIANCE)
    std = float(values.std())

    mean1 = float(values[groups == 1].mean())
    mean0 = float(values[groups == 0].mean())
    n = len(values)
    r = (mean1 - mean0) / std * math.sqrt(n1 * n0 / n**2)

    pearson, p_value = stats.pointbiserialr(groups, values)
    if abs(pearson - r) > _PEARSON_TOLERANCE:
        _LOGGER.warning("Point-biserial %f disagrees with Pearson %f", r, pearson)
    return BiserialResult(r, n1, n0, mean1, mean0, std, float(p_value))


@dataclass(frozen=True)
class ScoredRow:
    """One generation output with its reference and optional judgments."""

    id: str
    hypothesis: str
    reference: str
    label: int | None = None
    external: dict[str, float] = field(default_factory=dict, compare=False)

    @property
    def is_perfect(self) -> bool:
        """Return True if the output equals its reference token by token."""
        return tokenize(self.hypothesis) == tokenize(self.reference)


def read_scored_tsv(path: Path) -> list[ScoredRow]:
    """Read id, hypothesis, reference[, label, external metrics...] rows."""
    rows: list[ScoredRow] = []
    metric_names: list[str] = []
    try:
        file = open(path, encoding="utf-8", newline="")
    except OSError as err:
        raise DataError(f"Cannot read {path}: {err}") from err
    with file:
        reader = csv.reader(file, delimiter="\t", quoting=csv.QUOTE_NONE)
        for line, fields in enumerate(reader, start=1):
            if not fields:
                continue
            if line == 1 and fields[0] == "id":
                metric_names = fields[4:]
                continue
            if len(fields) < 3:
                raise DataError(f"{path}:{line}: expected at least 3 columns")
            label = None
            if len(fields) > 3 and fields[3] != "":
                if fields[3] not in ("0", "1"):
                    raise DataError(f"{path}:{line}: label must be 0 or 1, got {fields[3]!r}")
                label = int(fields[3])
            external = {}
            for column, value in enumerate(fields[4:]):
                name = (
                    metric_names[column] if column < len(metric_names) else f"metric{column + 1}"
                )
                try:
                    external[name] = float(value)
                except ValueError as err:
                    raise DataError(f"{path}:{line}: {name} is not a number") from err
            rows.append(ScoredRow(fields[0], fields[1], fields[2], label, external))
    _LOGGER.debug("Read %d scored rows from %s", len(rows), path)
    return rows


def perfect_rate(rows: Sequence[ScoredRow]) -> float:
    """Return the percentage of outputs identical to their reference."""
    if not rows:
        raise EmptyInputError(ERROR_EMPTY_INPUT)
    return 100.0 * sum(1 for row in rows if row.is_perfect) / len(rows)


def select_for_annotation(
    rows: Sequence[ScoredRow],
    n: int = DEFAULT_ANNOTATION_SAMPLE,
    seed: int = DEFAULT_SEED,
) -> list[ScoredRow]:
    """Sample outputs that differ from their reference, in input order."""
    candidates = [index for index, row in enumerate(rows) if not row.is_perfect]
    if len(candidates) < n:
        _LOGGER.warning("Only %d imperfect outputs for a sample of %d", len(candidates), n)
    chosen = random.Random(seed).sample(candidates, min(n, len(candidates)))
    return [rows[index] for index in sorted(chosen)]
