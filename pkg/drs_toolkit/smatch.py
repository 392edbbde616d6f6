"""Smatch scoring of triple sets with hill-climbing variable alignment."""
from __future__ import annotations

import logging
import random
from collections import Counter
from collections.abc import Iterator, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import StrEnum
from fractions import Fraction
from pathlib import Path
from typing import Any

import numpy as np

from .const import (
    DEFAULT_RESTARTS,
    DEFAULT_SEED,
    ERROR_MISALIGNED,
    ERROR_ORACLE_BOUND,
    MEMBERSHIP_LABEL,
    ORACLE_MAX_VARIABLES,
)
from .exceptions import ConfigError, DataError, MisalignedFilesError, OracleBoundError
from .graph import IllFormedReport, build_graph, convert, err_rate
from .penman_codec import INSTANCE_ROLE, Triple, TripleSet, drg_triples
from .sequence_model import SymbolInventory, TokenSequence

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class VariableMapping:
    """Partial injective mapping from system variables to gold variables."""

    pairs: tuple[tuple[str, str], ...] = ()

    def __post_init__(self) -> None:
        """Check injectivity."""
        targets = [target for _, target in self.pairs]
        if len(set(targets)) != len(targets):
            raise ValueError(f"Mapping is not injective: {self.pairs}")

    @classmethod
    def from_dict(cls, mapping: dict[str, str | None]) -> VariableMapping:
        """Create a mapping, dropping unmapped variables."""
        return cls(tuple((src, dst) for src, dst in mapping.items() if dst is not None))

    def get(self, var: str) -> str | None:
        """Return the image of a variable."""
        for src, dst in self.pairs:
            if src == var:
                return dst
        return None

    def as_dict(self) -> dict[str, str]:
        """Return the mapping as a dict."""
        return dict(self.pairs)

    def inverse(self) -> VariableMapping:
        """Return the inverse mapping."""
        return VariableMapping(tuple((dst, src) for src, dst in self.pairs))

    def __len__(self) -> int:
        return len(self.pairs)


@dataclass(frozen=True)
class SmatchScore:
    """Matched triple counts under the best mapping found."""

    matched: int
    total_system: int
    total_gold: int
    mapping: VariableMapping = field(default_factory=VariableMapping)

    @property
    def precision(self) -> float:
        return self.matched / self.total_system if self.total_system else 0.0

    @property
    def recall(self) -> float:
        return self.matched / self.total_gold if self.total_gold else 0.0

    @property
    def f1(self) -> float:
        return float(self.f1_exact)

    @property
    def f1_exact(self) -> Fraction:
        """Return F1 as an exact fraction."""
        total = self.total_system + self.total_gold
        return Fraction(2 * self.matched, total) if total else Fraction(0)

    def to_dict(self) -> dict[str, Any]:
        """Return a JSON-serializable dict with percentages."""
        return {
            "precision": 100.0 * self.precision,
            "recall": 100.0 * self.recall,
            "f1": 100.0 * self.f1,
            "matched": self.matched,
            "total_system": self.total_system,
            "total_gold": self.total_gold,
        }


def _attribute_counts(triples: TripleSet) -> dict[str, Counter[tuple[str, str]]]:
    counts: dict[str, Counter[tuple[str, str]]] = {}
    for source, role, value in triples.attributes:
        counts.setdefault(source, Counter())[(role, value)] += 1
    return counts


def _relation_counts(triples: TripleSet) -> dict[tuple[str, str], Counter[str]]:
    counts: dict[tuple[str, str], Counter[str]] = {}
    for source, role, target in triples.relations:
        counts.setdefault((source, target), Counter())[role] += 1
    return counts


class _Alignment:
    """Triple weights between a left and a right triple set."""

    def __init__(self, left: TripleSet, right: TripleSet) -> None:
        """Precompute unary and pairwise weights."""
        self.left_vars = left.variables
        self.right_vars = right.variables
        right_labels = {var: label for var, _, label in right.instances}
        left_attrs = _attribute_counts(left)
        right_attrs = _attribute_counts(right)

        self.unary: dict[tuple[str, str], int] = {}
        for var, _, label in left.instances:
            attrs = left_attrs.get(var, Counter())
            for other in self.right_vars:
                weight = int(right_labels[other] == label)
                weight += sum((attrs & right_attrs.get(other, Counter())).values())
                if weight:
                    self.unary[(var, other)] = weight

        self._left_rel = _relation_counts(left)
        self._right_rel = _relation_counts(right)
        self.left_pairs = list(self._left_rel)
        self.touching: dict[str, list[tuple[str, str]]] = {}
        for key in self.left_pairs:
            for var in set(key):
                self.touching.setdefault(var, []).append(key)

    def pair_weight(self, key: tuple[str, str], mapping: dict[str, str | None]) -> int:
        """Return matched relation triples of one left variable pair."""
        target = (mapping.get(key[0]), mapping.get(key[1]))
        if target[0] is None or target[1] is None:
            return 0
        right = self._right_rel.get(target)
        if not right:
            return 0
        return sum((self._left_rel[key] & right).values())

    def pair_cap(self, key: tuple[str, str]) -> int:
        """Return the best weight a left pair can reach under any mapping."""
        left = self._left_rel[key]
        return max((sum((left & right).values()) for right in self._right_rel.values()), default=0)

    def score(self, mapping: dict[str, str | None]) -> int:
        """Return the matched triple count of a mapping."""
        total = sum(self.unary.get((var, dst), 0) for var, dst in mapping.items() if dst)
        return total + sum(self.pair_weight(key, mapping) for key in self.left_pairs)

    def local(self, variables: tuple[str, ...], mapping: dict[str, str | None]) -> int:
        """Return the part of the score that depends on the given variables."""
        total = 0
        keys: set[tuple[str, str]] = set()
        for var in variables:
            dst = mapping.get(var)
            if dst is not None:
                total += self.unary.get((var, dst), 0)
            keys.update(self.touching.get(var, ()))
        return total + sum(self.pair_weight(key, mapping) for key in keys)

    def greedy_start(self, left_labels: dict[str, str], right_labels: dict[str, str]) -> dict:
        """Map variables with equal instance labels in variable order."""
        used: set[str] = set()
        mapping: dict[str, str | None] = {}
        for var in self.left_vars:
            mapping[var] = None
            for other in self.right_vars:
                if other not in used and left_labels[var] == right_labels[other]:
                    mapping[var] = other
                    used.add(other)
                    break
        return mapping

    def random_start(self, rng: random.Random) -> dict:
        """Return a seeded random injective mapping."""
        targets: list[str | None] = list(self.right_vars)
        targets += [None] * max(0, len(self.left_vars) - len(targets))
        rng.shuffle(targets)
        return dict(zip(self.left_vars, targets))

    def climb(self, mapping: dict[str, str | None]) -> tuple[int, dict[str, str | None]]:
        """Apply the best improving remap or swap until none improves."""
        score = self.score(mapping)
        while True:
            best_gain, best_move = 0, None
            holders = {dst: var for var, dst in mapping.items() if dst is not None}
            for var in self.left_vars:
                current = mapping[var]
                for other in self.right_vars:
                    if other == current:
                        continue
                    holder = holders.get(other)
                    changed = (var,) if holder is None else (var, holder)
                    before = self.local(changed, mapping)
                    mapping[var] = other
                    if holder is not None:
                        mapping[holder] = current
                    gain = self.local(changed, mapping) - before
                    mapping[var] = current
                    if holder is not None:
                        mapping[holder] = other
                    if gain > best_gain:
                        best_gain, best_move = gain, (var, other, holder)
            if best_move is None:
                return score, mapping
            var, other, holder = best_move
            if holder is not None:
                mapping[holder] = mapping[var]
            mapping[var] = other
            score += best_gain

    def exhaustive(self) -> tuple[int, dict[str, str | None]]:
        """Return an optimal mapping by branch and bound over injections."""
        order = list(self.left_vars)
        depth_of = {var: depth for depth, var in enumerate(order)}
        completes: list[list[tuple[str, str]]] = [[] for _ in order]
        for key in self.left_pairs:
            completes[max(depth_of[key[0]], depth_of[key[1]])].append(key)

        caps = [
            max((self.unary.get((var, other), 0) for other in self.right_vars), default=0)
            + sum(self.pair_cap(key) for key in completes[depth])
            for depth, var in enumerate(order)
        ]
        suffix = [0] * (len(order) + 1)
        for depth in range(len(order) - 1, -1, -1):
            suffix[depth] = suffix[depth + 1] + caps[depth]

        best: list[Any] = [-1, {}]
        mapping: dict[str, str | None] = {}
        used: set[str] = set()

        def _search(depth: int, score: int) -> None:
            if score + suffix[depth] <= best[0]:
                return
            if depth == len(order):
                best[0], best[1] = score, dict(mapping)
                return
            var = order[depth]
            free = [other for other in self.right_vars if other not in used]
            free.sort(key=lambda other: -self.unary.get((var, other), 0))
            for other in (*free, None):
                mapping[var] = other
                if other is not None:
                    used.add(other)
                gain = self.unary.get((var, other), 0) if other else 0
                gain += sum(self.pair_weight(key, mapping) for key in completes[depth])
                _search(depth + 1, score + gain)
                if other is not None:
                    used.discard(other)
            del mapping[var]

        _search(0, 0)
        return best[0], best[1]


def _labels(triples: TripleSet) -> dict[str, str]:
    return {var: label for var, _, label in triples.instances}


def smatch_score(
    system: TripleSet,
    gold: TripleSet,
    restarts: int = DEFAULT_RESTARTS,
    seed: int = DEFAULT_SEED,
) -> SmatchScore:
    """Score two triple sets by hill climbing over variable mappings."""
    if restarts < 1:
        raise ConfigError(f"restarts must be at least 1, got {restarts}")

    alignment = _Alignment(system, gold)
    best_score, best_mapping = -1, {}
    for restart in range(restarts):
        if restart == 0:
            start = alignment.greedy_start(_labels(system), _labels(gold))
        else:
            start = alignment.random_start(random.Random(f"{seed}:{restart}"))
        score, mapping = alignment.climb(start)
        _LOGGER.debug("Restart %d reached %d matched triples", restart, score)
        if score > best_score:
            best_score, best_mapping = score, mapping
        if best_score == min(len(system), len(gold)):
            break

    return SmatchScore(
        max(best_score, 0), len(system), len(gold), VariableMapping.from_dict(best_mapping)
    )


def smatch_oracle(system: TripleSet, gold: TripleSet) -> SmatchScore:
    """Return the optimal score by enumerating injective mappings."""
    smaller = min(len(system.variables), len(gold.variables))
    if smaller > ORACLE_MAX_VARIABLES:
        raise OracleBoundError(
            f"{ERROR_ORACLE_BOUND}: {smaller} > {ORACLE_MAX_VARIABLES} variables"
        )

    if len(system.variables) <= len(gold.variables):
        score, mapping = _Alignment(system, gold).exhaustive()
        result = VariableMapping.from_dict(mapping)
    else:
        score, mapping = _Alignment(gold, system).exhaustive()
        result = VariableMapping.from_dict(mapping).inverse()
    return SmatchScore(score, len(system), len(gold), result)


def aligned_score(system: TripleSet, gold: TripleSet, restarts: int, seed: int) -> SmatchScore:
    """Use the oracle within its bound, hill climbing otherwise."""
    if min(len(system.variables), len(gold.variables)) <= ORACLE_MAX_VARIABLES:
        return smatch_oracle(system, gold)
    return smatch_score(system, gold, restarts, seed)


@dataclass(frozen=True)
class DocumentScore:
    """Smatch counts of one system/gold line pair."""

    index: int
    matched: int
    total_system: int
    total_gold: int
    report: IllFormedReport | None = None

    @property
    def f1(self) -> float:
        total = self.total_system + self.total_gold
        return 2 * self.matched / total if total else 0.0

    def to_dict(self) -> dict[str, Any]:
        """Return a JSON-serializable dict."""
        data: dict[str, Any] = {
            "index": self.index,
            "matched": self.matched,
            "total_system": self.total_system,
            "total_gold": self.total_gold,
            "f1": 100.0 * self.f1,
        }
        if self.report is not None:
            data["ill_formed"] = self.report.to_dict()
        return data


@dataclass(frozen=True)
class CorpusScore:
    """Micro-averaged Smatch over a corpus plus its ill-formed rate."""

    score: SmatchScore
    err: float
    n_docs: int
    n_ill_formed: int
    documents: tuple[DocumentScore, ...] = field(default=(), repr=False)

    def to_dict(self, per_doc: bool = False) -> dict[str, Any]:
        """Return the JSON report."""
        data: dict[str, Any] = {
            "precision": 100.0 * self.score.precision,
            "recall": 100.0 * self.score.recall,
            "f1": 100.0 * self.score.f1,
            "err": self.err,
            "n_docs": self.n_docs,
            "n_ill_formed": self.n_ill_formed,
        }
        if per_doc:
            data["documents"] = [doc.to_dict() for doc in self.documents]
        return data


def pair_seed(seed: int, index: int) -> int:
    """Derive the search seed of one line pair."""
    return int(np.random.SeedSequence([seed, index]).generate_state(1)[0])


def _score_line_pair(
    job: tuple[int, str, str, int, int, SymbolInventory | None, bool]
) -> DocumentScore:
    """Score one line pair; module level so worker processes can run it."""
    index, system_line, gold_line, restarts, seed, inventory, strict_scope = job
    gold = convert(gold_line, inventory, strict_scope)
    if isinstance(gold, IllFormedReport):
        raise DataError(f"Gold line {index + 1} is ill-formed: {gold.category} {gold.detail}")
    gold_triples = drg_triples(gold)

    system = convert(system_line, inventory, strict_scope)
    if isinstance(system, IllFormedReport):
        return DocumentScore(index, 0, 0, len(gold_triples), system)

    score = smatch_score(drg_triples(system), gold_triples, restarts, pair_seed(seed, index))
    return DocumentScore(index, score.matched, score.total_system, score.total_gold)


def corpus_f1(
    pairs: Sequence[tuple[str, str]],
    restarts: int = DEFAULT_RESTARTS,
    seed: int = DEFAULT_SEED,
    inventory: SymbolInventory | None = None,
    jobs: int = 1,
    strict_scope: bool = False,
) -> CorpusScore:
    """Score aligned system/gold lines with summed counts."""
    jobs_args = [
        (index, system, gold, restarts, seed, inventory, strict_scope)
        for index, (system, gold) in enumerate(pairs)
    ]
    if jobs > 1 and len(jobs_args) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as executor:
            documents = tuple(executor.map(_score_line_pair, jobs_args, chunksize=16))
    else:
        documents = tuple(_score_line_pair(job) for job in jobs_args)

    for doc in documents:
        if doc.report is not None:
            _LOGGER.warning(
                "System line %d is ill-formed: %s", doc.index + 1, doc.report.category
            )

    score = SmatchScore(
        sum(doc.matched for doc in documents),
        sum(doc.total_system for doc in documents),
        sum(doc.total_gold for doc in documents),
    )
    n_ill_formed = sum(1 for doc in documents if doc.report is not None)
    err = err_rate([doc.report or doc for doc in documents])
    _LOGGER.info("Scored %d documents, %d ill-formed", len(documents), n_ill_formed)
    return CorpusScore(score, err, len(documents), n_ill_formed, documents)


def read_line_pairs(system_path: Path, gold_path: Path) -> list[tuple[str, str]]:
    """Read two line-aligned files into (system, gold) pairs."""
    try:
        system_lines = Path(system_path).read_text(encoding="utf-8").splitlines()
        gold_lines = Path(gold_path).read_text(encoding="utf-8").splitlines()
    except OSError as err:
        raise DataError(f"Cannot read line pairs: {err}") from err
    if len(system_lines) != len(gold_lines):
        raise MisalignedFilesError(
            f"{ERROR_MISALIGNED}: {system_path} has {len(system_lines)} lines, "
            f"{gold_path} has {len(gold_lines)}"
        )
    return list(zip(system_lines, gold_lines))


class DiffCategory(StrEnum):
    """Kind of semantic difference between a system and a gold graph."""

    WRONG_CONCEPT = "WrongConcept"
    WRONG_ROLE = "WrongRole"
    WRONG_INDEX = "WrongIndex"
    MISSING_TOKEN = "MissingToken"
    EXTRA_TOKEN = "ExtraToken"


@dataclass(frozen=True, slots=True)
class DiffFinding:
    """One difference with the fragments on each side."""

    category: DiffCategory
    system: str
    gold: str


@dataclass(frozen=True)
class DiffReport:
    """Differences between a system and a gold graph under the best mapping."""

    findings: tuple[DiffFinding, ...]
    score: SmatchScore

    def __iter__(self) -> Iterator[DiffFinding]:
        return iter(self.findings)

    def __len__(self) -> int:
        return len(self.findings)

    def categories(self) -> list[DiffCategory]:
        """Return the finding categories in order."""
        return [finding.category for finding in self.findings]

    def to_dict(self) -> dict[str, Any]:
        """Return a JSON-serializable dict."""
        return {
            "findings": [
                {"category": str(f.category), "system": f.system, "gold": f.gold}
                for f in self.findings
            ],
            "f1": 100.0 * self.score.f1,
        }


def _entity_rank(var: str) -> int | None:
    """Return the introduction rank of an entity variable."""
    if var.startswith("e") and var[1:].isdigit():
        return int(var[1:])
    return None


def _fragment(triple: Triple, labels: dict[str, str]) -> str:
    """Render a triple as the sequence tokens it stands for."""
    source, role, target = triple
    if role == INSTANCE_ROLE:
        return target
    name = role.lstrip(":")
    if target not in labels:
        return f"{name} {target}"
    if name == MEMBERSHIP_LABEL:
        return labels[target]
    src_rank, dst_rank = _entity_rank(source), _entity_rank(target)
    if src_rank is None or dst_rank is None:
        return name
    return f"{name} {dst_rank - src_rank:+d}"


def _unmatched(
    system: TripleSet, gold: TripleSet, mapping: dict[str, str]
) -> tuple[list[Triple], list[Triple]]:
    """Return the system and gold triples left unmatched by a mapping."""
    system_vars = set(system.variables)
    gold_left = Counter(gold.triples)
    extra = []
    for triple in system.triples:
        source, role, target = triple
        if target in system_vars:
            target = mapping.get(target)
        image = (mapping.get(source), role, target)
        if image[0] is not None and image[2] is not None and gold_left[image] > 0:
            gold_left[image] -= 1
        else:
            extra.append(triple)

    missing = []
    for triple in gold.triples:
        if gold_left[triple] > 0:
            gold_left[triple] -= 1
            missing.append(triple)
    return extra, missing


def classify_diff(
    system: TokenSequence,
    gold: TokenSequence,
    restarts: int = DEFAULT_RESTARTS,
    seed: int = DEFAULT_SEED,
) -> DiffReport:
    """Classify the unmatched triples of two well-formed sequences."""
    system_triples = drg_triples(build_graph(system))
    gold_triples = drg_triples(build_graph(gold))
    score = aligned_score(system_triples, gold_triples, restarts, seed)
    mapping = score.mapping.as_dict()
    system_labels, gold_labels = _labels(system_triples), _labels(gold_triples)

    extra, missing = _unmatched(system_triples, gold_triples, mapping)
    findings: list[DiffFinding] = []

    def _claim(predicate: Any) -> Triple | None:
        for candidate in missing:
            if predicate(candidate):
                missing.remove(candidate)
                return candidate
        return None

    for triple in extra:
        source, role, target = triple
        image_source = mapping.get(source)
        image_target = mapping.get(target) if target in system_labels else target

        if role == INSTANCE_ROLE:
            counterpart = image_source and _claim(
                lambda t: t[0] == image_source and t[1] == INSTANCE_ROLE
            )
            if counterpart:
                findings.append(
                    DiffFinding(DiffCategory.WRONG_CONCEPT, target, counterpart[2])
                )
            else:
                findings.append(DiffFinding(DiffCategory.EXTRA_TOKEN, target, ""))
            continue

        counterpart = image_source and _claim(
            lambda t: t[0] == image_source and t[2] == image_target and t[1] != INSTANCE_ROLE
        )
        if counterpart:
            findings.append(
                DiffFinding(
                    DiffCategory.WRONG_ROLE, role.lstrip(":"), counterpart[1].lstrip(":")
                )
            )
            continue
        counterpart = image_source and _claim(lambda t: t[0] == image_source and t[1] == role)
        if counterpart:
            findings.append(
                DiffFinding(
                    DiffCategory.WRONG_INDEX,
                    _fragment(triple, system_labels),
                    _fragment(counterpart, gold_labels),
                )
            )
            continue
        findings.append(
            DiffFinding(DiffCategory.EXTRA_TOKEN, _fragment(triple, system_labels), "")
        )

    for triple in missing:
        findings.append(
            DiffFinding(DiffCategory.MISSING_TOKEN, "", _fragment(triple, gold_labels))
        )

    _LOGGER.debug("Classified %d differences", len(findings))
    return DiffReport(tuple(findings), score)
