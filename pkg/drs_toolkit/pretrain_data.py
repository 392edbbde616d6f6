"""Training-pair emission for denoising pre-training and fine-tuning."""
from __future__ import annotations

import logging
import math
import random
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .const import (
    CROSS_DRS_BOTH,
    CROSS_DRS_NONE,
    CROSS_DRS_PIVOT_CONTEXT,
    CROSS_DRS_TARGET_CONTEXT,
    DEFAULT_MASK_RATE,
    DEFAULT_MASK_TOKEN,
    DEFAULT_SEED,
    DEFAULT_SPAN_LAMBDA,
    DRS_PREFIX,
    ERROR_EMPTY_INPUT,
    LANGUAGE_PREFIXES,
    PAIR_BPT,
    PAIR_FT_GENERATE,
    PAIR_FT_PARSE,
    PAIR_SPT_CROSS,
    PAIR_SPT_MONO,
    PIVOT_LANGUAGE,
    PREFIX_TOKENS,
    SEP_TOKEN,
    SPLIT_TRAIN,
    TASK_BOTH,
    TASK_GENERATE,
    TASK_PARSE,
)
from .corpus import CorpusDocument, CorpusSet
from .exceptions import ConfigError, EmptyInputError

_LOGGER = logging.getLogger(__name__)

CROSS_DRS_MODES = (
    CROSS_DRS_BOTH,
    CROSS_DRS_PIVOT_CONTEXT,
    CROSS_DRS_TARGET_CONTEXT,
    CROSS_DRS_NONE,
)
FT_TASKS = (TASK_PARSE, TASK_GENERATE, TASK_BOTH)


@dataclass(frozen=True)
class NoiseSpec:
    """How sequences are corrupted for denoising."""

    mask_rate: float = DEFAULT_MASK_RATE
    mask_token: str = DEFAULT_MASK_TOKEN
    seed: int = DEFAULT_SEED
    span_masking: bool = False
    span_lambda: float = DEFAULT_SPAN_LAMBDA

    def __post_init__(self) -> None:
        """Validate the rate."""
        if not 0 < self.mask_rate < 1:
            raise ConfigError(f"mask_rate must be in (0, 1), got {self.mask_rate}")
        if self.span_lambda <= 0:
            raise ConfigError(f"span_lambda must be positive, got {self.span_lambda}")

    def mask_count(self, n: int) -> int:
        """Return how many of n maskable tokens are masked."""
        return math.ceil(Fraction(str(self.mask_rate)) * n)


@dataclass(frozen=True, slots=True)
class TrainingPair:
    """A source/target token pair for one training stage."""

    stage: str
    lang: str
    source: tuple[str, ...]
    target: tuple[str, ...]
    direction: str = ""

    def to_row(self) -> str:
        """Return the TSV row: stage, lang, source, target."""
        return "\t".join((self.stage, self.lang, " ".join(self.source), " ".join(self.target)))


def document_rng(seed: int, lang: str, doc_id: str, side: str) -> random.Random:
    """Return the RNG for one corrupted side of one document."""
    return random.Random(f"{seed}:{lang}:{doc_id}:{side}")


def _is_maskable(token: str) -> bool:
    return token not in PREFIX_TOKENS and token != SEP_TOKEN


def corrupt(
    seq: Sequence[str], spec: NoiseSpec, rng: random.Random | None = None
) -> list[str]:
    """Mask ceil(rate * n) maskable tokens of a sequence."""
    if not seq:
        raise EmptyInputError(ERROR_EMPTY_INPUT)
    rng = rng or random.Random(spec.seed)
    maskable = [index for index, token in enumerate(seq) if _is_maskable(token)]
    count = spec.mask_count(len(maskable))
    if not count:
        return list(seq)

    if not spec.span_masking:
        masked = set(rng.sample(maskable, count))
        return [spec.mask_token if index in masked else token for index, token in enumerate(seq)]

    span_of = _place_spans(maskable, count, spec.span_lambda, rng)
    corrupted, emitted = [], set()
    for index, token in enumerate(seq):
        span = span_of.get(index)
        if span is None:
            corrupted.append(token)
        elif span not in emitted:
            corrupted.append(spec.mask_token)
            emitted.add(span)
    return corrupted


def _place_spans(
    maskable: list[int], count: int, span_lambda: float, rng: random.Random
) -> dict[int, int]:
    """Return span ids of masked positions, with Poisson span lengths."""
    generator = np.random.default_rng(rng.getrandbits(64))
    lengths: list[int] = []
    while sum(lengths) < count:
        length = max(1, int(generator.poisson(span_lambda)))
        lengths.append(min(length, count - sum(lengths)))

    # spans and unmasked tokens arranged uniformly
    slots = len(maskable) - count + len(lengths)
    span_slots = set(rng.sample(range(slots), len(lengths)))
    span_of: dict[int, int] = {}
    cursor = span = 0
    for slot in range(slots):
        if slot in span_slots:
            for offset in range(lengths[span]):
                span_of[maskable[cursor + offset]] = span
            cursor += lengths[span]
            span += 1
        else:
            cursor += 1
    return span_of


def _documents(source: CorpusSet | Iterable[CorpusDocument]) -> list[CorpusDocument]:
    """Return the training documents of a corpus, or the given documents."""
    if isinstance(source, CorpusSet):
        return source.documents(splits=(SPLIT_TRAIN,))
    return list(source)


def _prefix(lang: str) -> str:
    return LANGUAGE_PREFIXES[lang]


def emit_bpt(
    source: CorpusSet | Iterable[CorpusDocument], spec: NoiseSpec
) -> Iterator[TrainingPair]:
    """Yield text and DRS denoising pairs for every document."""
    for doc in _documents(source):
        text, drs = doc.text.split(), doc.drs.split()
        text_rng = document_rng(spec.seed, doc.lang, doc.id, "bpt-text")
        drs_rng = document_rng(spec.seed, doc.lang, doc.id, "bpt-drs")
        yield TrainingPair(
            PAIR_BPT,
            doc.lang,
            (_prefix(doc.lang), *corrupt(text, spec, text_rng)),
            (_prefix(doc.lang), *text),
            "text",
        )
        yield TrainingPair(
            PAIR_BPT,
            doc.lang,
            (DRS_PREFIX, *corrupt(drs, spec, drs_rng)),
            (DRS_PREFIX, *drs),
            "drs",
        )


def _denoise_pair(
    stage: str,
    lang: str,
    context: Sequence[str],
    prefix: str,
    tokens: Sequence[str],
    spec: NoiseSpec,
    rng: random.Random,
    direction: str,
) -> TrainingPair:
    """Pair context + corrupted sequence with the original sequence."""
    return TrainingPair(
        stage,
        lang,
        (*context, SEP_TOKEN, prefix, *corrupt(tokens, spec, rng)),
        (prefix, *tokens),
        direction,
    )


def _mono_pairs(doc: CorpusDocument, spec: NoiseSpec) -> Iterator[TrainingPair]:
    text, drs = doc.text.split(), doc.drs.split()
    prefix = _prefix(doc.lang)
    yield _denoise_pair(
        PAIR_SPT_MONO,
        doc.lang,
        (prefix, *text),
        DRS_PREFIX,
        drs,
        spec,
        document_rng(spec.seed, doc.lang, doc.id, "spt-mono-drs"),
        "text-to-drs",
    )
    yield _denoise_pair(
        PAIR_SPT_MONO,
        doc.lang,
        (DRS_PREFIX, *drs),
        prefix,
        text,
        spec,
        document_rng(spec.seed, doc.lang, doc.id, "spt-mono-text"),
        "drs-to-text",
    )


def _cross_pairs(
    pivot: CorpusDocument, other: CorpusDocument, spec: NoiseSpec, cross_drs: str
) -> Iterator[TrainingPair]:
    lang = other.lang
    pivot_context = (_prefix(pivot.lang), *pivot.text.split())
    other_context = (_prefix(lang), *other.text.split())

    def _rng(side: str) -> random.Random:
        return document_rng(spec.seed, lang, other.id, f"spt-cross-{side}")

    yield _denoise_pair(
        PAIR_SPT_CROSS,
        lang,
        pivot_context,
        other_context[0],
        other_context[1:],
        spec,
        _rng("text-target"),
        f"{pivot.lang}-to-{lang}",
    )
    yield _denoise_pair(
        PAIR_SPT_CROSS,
        lang,
        other_context,
        pivot_context[0],
        pivot_context[1:],
        spec,
        _rng("text-pivot"),
        f"{lang}-to-{pivot.lang}",
    )
    if cross_drs in (CROSS_DRS_BOTH, CROSS_DRS_PIVOT_CONTEXT):
        yield _denoise_pair(
            PAIR_SPT_CROSS,
            lang,
            pivot_context,
            DRS_PREFIX,
            other.drs.split(),
            spec,
            _rng("drs-target"),
            f"{pivot.lang}-to-drs-{lang}",
        )
    if cross_drs in (CROSS_DRS_BOTH, CROSS_DRS_TARGET_CONTEXT):
        yield _denoise_pair(
            PAIR_SPT_CROSS,
            lang,
            other_context,
            DRS_PREFIX,
            pivot.drs.split(),
            spec,
            _rng("drs-pivot"),
            f"{lang}-to-drs-{pivot.lang}",
        )


def emit_spt(
    source: CorpusSet | Iterable[CorpusDocument],
    spec: NoiseSpec,
    mono: bool = True,
    cross: bool = True,
    cross_drs: str = CROSS_DRS_BOTH,
) -> Iterator[TrainingPair]:
    """Yield monolingual and pivot-centred cross-lingual denoising pairs."""
    if cross_drs not in CROSS_DRS_MODES:
        raise ConfigError(f"Unknown cross DRS mode {cross_drs!r}, expected {CROSS_DRS_MODES}")
    documents = _documents(source)
    if mono:
        for doc in documents:
            yield from _mono_pairs(doc, spec)
    if not cross:
        return

    by_id: dict[str, dict[str, CorpusDocument]] = {}
    for doc in documents:
        by_id.setdefault(doc.id, {}).setdefault(doc.lang, doc)

    skipped = 0
    for doc_id, versions in by_id.items():
        pivot = versions.get(PIVOT_LANGUAGE)
        others = [doc for lang, doc in versions.items() if lang != PIVOT_LANGUAGE]
        if pivot is None:
            skipped += len(others)
            _LOGGER.debug("No %s counterpart for %s", PIVOT_LANGUAGE, doc_id)
            continue
        for other in others:
            yield from _cross_pairs(pivot, other, spec, cross_drs)
    if skipped:
        _LOGGER.warning(
            "Skipped %d documents without a %s counterpart", skipped, PIVOT_LANGUAGE
        )


def emit_ft(
    source: CorpusSet | Iterable[CorpusDocument], task: str = TASK_PARSE
) -> Iterator[TrainingPair]:
    """Yield parsing and/or generation pairs."""
    if task not in FT_TASKS:
        raise ConfigError(f"Unknown task {task!r}, expected one of {FT_TASKS}")
    documents = _documents(source)
    if task in (TASK_PARSE, TASK_BOTH):
        for doc in documents:
            yield TrainingPair(
                PAIR_FT_PARSE,
                doc.lang,
                (_prefix(doc.lang), *doc.text.split()),
                (DRS_PREFIX, *doc.drs.split()),
                TASK_PARSE,
            )
    if task in (TASK_GENERATE, TASK_BOTH):
        for doc in documents:
            yield TrainingPair(
                PAIR_FT_GENERATE,
                doc.lang,
                (DRS_PREFIX, *doc.drs.split()),
                (_prefix(doc.lang), *doc.text.split()),
                TASK_GENERATE,
            )


def write_pairs(pairs: Iterable[TrainingPair], path: Path | str) -> int:
    """Write pairs as TSV rows in emission order."""
    count = 0
    with open(path, "w", encoding="utf-8", newline="\n") as file:
        for pair in pairs:
            file.write(pair.to_row() + "\n")
            count += 1
    _LOGGER.info("Wrote %d training pairs to %s", count, path)
    return count
