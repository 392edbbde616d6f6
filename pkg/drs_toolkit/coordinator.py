"""Coordinator that runs pipeline steps under one run configuration."""
from __future__ import annotations

import asyncio
import logging
from collections.abc import Iterable, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from .config import RunConfig
from .const import (
    CROSS_DRS_BOTH,
    PAIR_BPT,
    PAIR_FT_BOTH,
    PAIR_FT_GENERATE,
    PAIR_FT_PARSE,
    PAIR_SPT_CROSS,
    PAIR_SPT_MONO,
    SPLIT_TRAIN,
    STAGE_PT,
    TASK_BOTH,
    TASK_GENERATE,
    TASK_PARSE,
)
from .corpus import (
    CorpusDocument,
    CorpusSet,
    CorpusStats,
    RemovedDocument,
    assemble_stage,
    async_ingest,
    filter_convertible,
    filter_vocab,
    ingest,
    read_vocab,
    stats,
    write_corpus,
)
from .exceptions import ConfigError, DataError
from .graph import Drg, IllFormedReport, convert, err_rate
from .metric_providers.base import BaseMetricProvider
from .metric_providers.bleu_provider import BleuProvider
from .metric_providers.imported_provider import ImportedMetricProvider
from .penman_codec import PenmanGraph, to_penman
from .pretrain_data import NoiseSpec, TrainingPair, emit_bpt, emit_ft, emit_spt, write_pairs
from .sequence_model import SymbolInventory, lex, repair_line
from .smatch import CorpusScore, DiffReport, classify_diff, corpus_f1, read_line_pairs
from .textmetrics import (
    BiserialResult,
    BleuScore,
    ScoredRow,
    bleu,
    perfect_rate,
    read_scored_tsv,
    select_for_annotation,
    tokenize,
)

_LOGGER = logging.getLogger(__name__)

EMIT_STAGES = (
    PAIR_BPT,
    PAIR_SPT_MONO,
    PAIR_SPT_CROSS,
    PAIR_FT_PARSE,
    PAIR_FT_GENERATE,
    PAIR_FT_BOTH,
)


def read_lines(path: Path | str) -> list[str]:
    """Read a UTF-8 file into lines."""
    try:
        return Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as err:
        raise DataError(f"Cannot read {path}: {err}") from err


def _check_line(job: tuple[str, SymbolInventory, bool]) -> IllFormedReport | None:
    """Convert one line; module level so worker processes can run it."""
    line, inventory, strict_scope = job
    result = convert(line, inventory, strict_scope)
    return result if isinstance(result, IllFormedReport) else None


@dataclass(frozen=True)
class CheckResult:
    """Ill-formed lines of a DRS file."""

    n_lines: int
    failures: tuple[tuple[int, IllFormedReport], ...]

    @property
    def err(self) -> float:
        return 100.0 * len(self.failures) / self.n_lines if self.n_lines else 0.0

    def to_dict(self) -> dict[str, Any]:
        """Return a JSON-serializable dict."""
        return {
            "n_lines": self.n_lines,
            "n_ill_formed": len(self.failures),
            "err": self.err,
            "failures": [{"line": line, **report.to_dict()} for line, report in self.failures],
        }


class DrsToolkitCoordinator:
    """Runs each pipeline step with the configured inventory, seed and jobs."""

    def __init__(self, config: RunConfig | None = None) -> None:
        """Initialize the coordinator."""
        self.config = config or RunConfig()
        self._providers: list[BaseMetricProvider] = []

    @property
    def inventory(self) -> SymbolInventory:
        """Return the symbol inventory."""
        return self.config.inventory

    def _setup_providers(self, rows: Sequence[ScoredRow]) -> list[BaseMetricProvider]:
        """Set up BLEU plus one provider per imported metric column."""
        columns = list(dict.fromkeys(name for row in rows for name in row.external))
        self._providers = [BleuProvider(), *(ImportedMetricProvider(name) for name in columns)]
        _LOGGER.debug("Set up metric providers: %s", [p.metric_name for p in self._providers])
        return self._providers

    def check(self, lines: Sequence[str]) -> CheckResult:
        """Report which lines cannot be converted into graphs."""
        jobs = [(line, self.inventory, self.config.strict_scope) for line in lines]
        if self.config.jobs > 1 and len(jobs) > 1:
            with ProcessPoolExecutor(max_workers=self.config.jobs) as executor:
                reports = list(executor.map(_check_line, jobs, chunksize=64))
        else:
            reports = [_check_line(job) for job in jobs]
        failures = tuple(
            (number, report)
            for number, report in enumerate(reports, start=1)
            if report is not None
        )
        _LOGGER.info("Checked %d lines, %d ill-formed", len(lines), len(failures))
        return CheckResult(len(lines), failures)

    def err(self, lines: Sequence[str]) -> float:
        """Return the ill-formed percentage of DRS lines."""
        inventory, strict_scope = self.inventory, self.config.strict_scope
        return err_rate([convert(line, inventory, strict_scope) for line in lines])

    def graphs(self, lines: Sequence[str]) -> list[tuple[str, Drg | IllFormedReport]]:
        """Convert DRS lines to graphs, keeping failures in place."""
        graphs: list[tuple[str, Drg | IllFormedReport]] = []
        for number, line in enumerate(lines, start=1):
            result = convert(line, self.inventory, self.config.strict_scope)
            if isinstance(result, IllFormedReport):
                _LOGGER.warning("Line %d is ill-formed: %s", number, result.category)
            graphs.append((str(number), result))
        return graphs

    def penman(self, lines: Sequence[str]) -> list[tuple[str, PenmanGraph | IllFormedReport]]:
        """Convert DRS lines to Penman graphs, keeping failures in place."""
        return [
            (graph_id, to_penman(graph) if isinstance(graph, Drg) else graph)
            for graph_id, graph in self.graphs(lines)
        ]

    def smatch(self, system_path: Path | str, gold_path: Path | str) -> CorpusScore:
        """Score a system file against a gold file."""
        return corpus_f1(
            read_line_pairs(Path(system_path), Path(gold_path)),
            restarts=self.config.restarts,
            seed=self.config.seed,
            inventory=self.inventory,
            jobs=self.config.jobs,
            strict_scope=self.config.strict_scope,
        )

    def diff(self, system_line: str, gold_line: str) -> DiffReport:
        """Classify the differences between two DRS lines."""
        return classify_diff(
            lex(system_line, self.inventory),
            lex(gold_line, self.inventory),
            restarts=self.config.restarts,
            seed=self.config.seed,
        )

    def diff_files(
        self, system_path: Path | str, gold_path: Path | str
    ) -> list[tuple[int, DiffReport | IllFormedReport]]:
        """Classify differences line by line; ill-formed system lines stay as reports."""
        results: list[tuple[int, DiffReport | IllFormedReport]] = []
        pairs = read_line_pairs(Path(system_path), Path(gold_path))
        for number, (system_line, gold_line) in enumerate(pairs, start=1):
            system = convert(system_line, self.inventory, self.config.strict_scope)
            if isinstance(system, IllFormedReport):
                results.append((number, system))
                continue
            try:
                results.append((number, self.diff(system_line, gold_line)))
            except DataError as err:
                raise DataError(f"{gold_path}:{number}: {err}") from err
        return results

    def repair(self, lines: Iterable[str]) -> list[tuple[str, list[str]]]:
        """Apply whitespace repairs to every line."""
        return [repair_line(line, self.inventory) for line in lines]

    def bleu(self, hypothesis_path: Path | str, reference_path: Path | str) -> BleuScore:
        """Return corpus BLEU of two line-aligned files."""
        hypotheses = [tokenize(line) for line in read_lines(hypothesis_path)]
        references = [tokenize(line) for line in read_lines(reference_path)]
        return bleu(hypotheses, references)

    def correlate(self, tsv_path: Path | str) -> dict[str, BiserialResult]:
        """Correlate every available metric with the human labels."""
        rows = read_scored_tsv(Path(tsv_path))
        return {
            provider.metric_name: provider.correlate(rows)
            for provider in self._setup_providers(rows)
        }

    def sample(self, tsv_path: Path | str, n: int) -> tuple[list[ScoredRow], float]:
        """Draw outputs for annotation and report the perfect-output rate."""
        rows = read_scored_tsv(Path(tsv_path))
        return select_for_annotation(rows, n, self.config.seed), perfect_rate(rows)

    def load(self, root: Path | str) -> CorpusSet:
        """Ingest a corpus for the configured languages."""
        return asyncio.run(async_ingest(root, self.config.languages))

    def stats(self, root: Path | str) -> CorpusStats:
        """Count documents of a corpus."""
        return stats(ingest(root, self.config.languages))

    def filter(
        self, root: Path | str, output: Path | str
    ) -> tuple[CorpusSet, list[RemovedDocument]]:
        """Write the convertible part of a corpus to a new root."""
        corpus, removed = filter_convertible(
            self.load(root), self.inventory, self.config.strict_scope
        )
        write_corpus(corpus, output)
        return corpus, removed

    def upsample(
        self,
        root: Path | str,
        output: Path | str,
        stage: str,
        targets: dict[str, int],
        pool_tiers: Sequence[str],
    ) -> CorpusSet:
        """Write the documents of a stage with per-language upsampling."""
        docs = assemble_stage(
            self.load(root),
            stage,
            self.config.languages,
            targets,
            self.config.seed,
            pool_tiers,
        )
        # replicas share ids, so they are renumbered within each group
        groups: dict[tuple[str, str, str], list] = {}
        for doc in docs:
            groups.setdefault((doc.lang, doc.tier, SPLIT_TRAIN), []).append(doc)
        written = _renumbered(groups)
        write_corpus(written, output)
        return written

    def emit(
        self,
        root: Path | str,
        output: Path | str,
        stage: str,
        span_masking: bool = False,
        cross_drs: str = CROSS_DRS_BOTH,
    ) -> int:
        """Write the training pairs of one stage as TSV."""
        if stage not in EMIT_STAGES:
            raise ConfigError(f"Unknown stage {stage!r}, expected one of {EMIT_STAGES}")
        corpus = self.load(root)
        spec = NoiseSpec(self.config.mask_rate, seed=self.config.seed, span_masking=span_masking)
        documents = assemble_stage(corpus, STAGE_PT, self.config.languages)
        return write_pairs(self._pairs(stage, corpus, documents, spec, cross_drs), output)

    @staticmethod
    def _pairs(
        stage: str,
        corpus: CorpusSet,
        documents: list,
        spec: NoiseSpec,
        cross_drs: str,
    ) -> Iterable[TrainingPair]:
        if stage == PAIR_BPT:
            return emit_bpt(documents, spec)
        if stage == PAIR_SPT_MONO:
            return emit_spt(documents, spec, mono=True, cross=False)
        if stage == PAIR_SPT_CROSS:
            return emit_spt(documents, spec, mono=False, cross=True, cross_drs=cross_drs)
        task = {PAIR_FT_PARSE: TASK_PARSE, PAIR_FT_GENERATE: TASK_GENERATE}.get(stage, TASK_BOTH)
        return emit_ft(corpus.documents(splits=(SPLIT_TRAIN,)), task)

    def vocab(
        self, vocab_path: Path | str, corpus_paths: Iterable[Path | str], specials: Sequence[str]
    ) -> list[str]:
        """Filter a base vocabulary by tokenized corpora."""
        lines = (line for path in corpus_paths for line in read_lines(path))
        return filter_vocab(read_vocab(vocab_path), lines, specials)


def _renumbered(groups: dict[tuple[str, str, str], list]) -> CorpusSet:
    """Give replicated documents unique ids within their group."""
    renumbered = []
    for (lang, tier, split), docs in groups.items():
        for index, doc in enumerate(docs):
            renumbered.append(
                CorpusDocument(f"{doc.id}#{index:06d}", lang, tier, split, doc.text, doc.drs)
            )
    return CorpusSet.from_documents(renumbered)
