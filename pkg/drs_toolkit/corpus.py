"""Tiered multilingual text/DRS corpora: ingestion, filtering and selection."""
from __future__ import annotations

import asyncio
import json
import logging
import random
from collections import Counter
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .config import validate_manifest
from .const import (
    DEFAULT_POOL_TIERS,
    DEFAULT_SEED,
    DRS_SUFFIX,
    ERROR_EMPTY_INPUT,
    ERROR_MISALIGNED,
    IDS_SUFFIX,
    LANGUAGES,
    MANIFEST_COUNTS,
    MANIFEST_FILE,
    MANIFEST_LANGUAGES,
    MANIFEST_RELEASE,
    SPLIT_TRAIN,
    SPLITS,
    STAGE_TIERS,
    TEXT_SUFFIX,
    TIER_GOLD,
    TIERS,
)
from .exceptions import (
    ConfigError,
    DataError,
    EmptyInputError,
    MisalignedFilesError,
    MissingSplitError,
    UnknownLanguageError,
)
from .graph import IllFormedReport, convert
from .sequence_model import SymbolInventory

_LOGGER = logging.getLogger(__name__)

LANGUAGE_NAMES = {"en": "English", "de": "German", "it": "Italian", "nl": "Dutch"}

GroupKey = tuple[str, str, str]


def check_language(lang: str) -> str:
    """Return the language code or raise UnknownLanguageError."""
    if lang not in LANGUAGES:
        raise UnknownLanguageError(f"Unknown language {lang!r}, expected one of {LANGUAGES}")
    return lang


def _check_group(lang: str, tier: str, split: str) -> None:
    check_language(lang)
    if tier not in TIERS:
        raise DataError(f"Unknown tier {tier!r} for {lang}")
    if split not in SPLITS:
        raise DataError(f"Unknown split {split!r} in {lang}/{tier}")
    if tier != TIER_GOLD and split != SPLIT_TRAIN:
        raise DataError(f"Only gold data has a {split} split, found {lang}/{tier}/{split}")


@dataclass(frozen=True, slots=True)
class CorpusDocument:
    """One aligned text and DRS line."""

    id: str
    lang: str
    tier: str
    split: str
    text: str
    drs: str

    def __post_init__(self) -> None:
        """Check the document fields."""
        _check_group(self.lang, self.tier, self.split)
        if not self.text.strip() or not self.drs.strip():
            raise DataError(f"Document {self.id} ({self.lang}) has an empty text or DRS")

    @property
    def key(self) -> GroupKey:
        """Return the (lang, tier, split) group."""
        return self.lang, self.tier, self.split


@dataclass(frozen=True)
class CorpusSet:
    """Documents grouped by language, tier and split."""

    groups: dict[GroupKey, tuple[CorpusDocument, ...]] = field(default_factory=dict)
    release: str | None = None

    def __post_init__(self) -> None:
        """Check that ids are unique within each group."""
        for key, docs in self.groups.items():
            duplicates = [doc_id for doc_id, n in Counter(d.id for d in docs).items() if n > 1]
            if duplicates:
                raise DataError(f"Duplicate ids in {'/'.join(key)}: {duplicates[:5]}")

    @classmethod
    def from_documents(
        cls, documents: Iterable[CorpusDocument], release: str | None = None
    ) -> CorpusSet:
        """Group documents, keeping their order within each group."""
        groups: dict[GroupKey, list[CorpusDocument]] = {}
        for doc in documents:
            groups.setdefault(doc.key, []).append(doc)
        return cls({key: tuple(docs) for key, docs in groups.items()}, release)

    def documents(
        self,
        langs: Iterable[str] | None = None,
        tiers: Iterable[str] | None = None,
        splits: Iterable[str] | None = None,
    ) -> list[CorpusDocument]:
        """Return documents in language, tier and split order."""
        langs = tuple(LANGUAGES if langs is None else langs)
        tiers = tuple(TIERS if tiers is None else tiers)
        splits = tuple(SPLITS if splits is None else splits)
        return [
            doc
            for lang in langs
            for tier in tiers
            for split in splits
            for doc in self.groups.get((lang, tier, split), ())
        ]

    def group(self, lang: str, tier: str, split: str) -> tuple[CorpusDocument, ...]:
        """Return the documents of one group."""
        return self.groups.get((lang, tier, split), ())

    @property
    def languages(self) -> list[str]:
        """Return languages present, in canonical order."""
        present = {lang for lang, _, _ in self.groups}
        return [lang for lang in LANGUAGES if lang in present]

    def counts(self) -> dict[GroupKey, int]:
        """Return the number of documents per group."""
        return {key: len(docs) for key, docs in self.groups.items()}

    def __len__(self) -> int:
        return sum(len(docs) for docs in self.groups.values())


def _read_lines(path: Path) -> list[str]:
    return path.read_text(encoding="utf-8").splitlines()


def _read_split(directory: Path, lang: str, tier: str, split: str) -> list[CorpusDocument]:
    """Read one aligned .txt/.drs pair, with optional .ids."""
    text_path = directory / f"{split}{TEXT_SUFFIX}"
    drs_path = directory / f"{split}{DRS_SUFFIX}"
    ids_path = directory / f"{split}{IDS_SUFFIX}"
    for path, other in ((text_path, drs_path), (drs_path, text_path)):
        if not path.is_file():
            raise MissingSplitError(f"{other} has no matching {path.name}")

    texts, drs_lines = _read_lines(text_path), _read_lines(drs_path)
    if len(texts) != len(drs_lines):
        raise MisalignedFilesError(
            f"{ERROR_MISALIGNED}: {text_path} has {len(texts)} lines, "
            f"{drs_path} has {len(drs_lines)}"
        )
    if ids_path.is_file():
        ids = _read_lines(ids_path)
        if len(ids) != len(texts):
            raise MisalignedFilesError(
                f"{ERROR_MISALIGNED}: {ids_path} has {len(ids)} lines, "
                f"{text_path} has {len(texts)}"
            )
    else:
        # without .ids files no document is shared across languages
        ids = [f"{lang}/{tier}/{split}/{index:06d}" for index in range(len(texts))]

    documents = []
    for line, (doc_id, text, drs) in enumerate(zip(ids, texts, drs_lines), start=1):
        try:
            documents.append(CorpusDocument(doc_id.strip(), lang, tier, split, text, drs))
        except DataError as err:
            raise DataError(f"{text_path}:{line}: {err}") from err
    return documents


def _read_language(root: Path, lang: str) -> list[CorpusDocument]:
    """Read every tier and split of one language directory."""
    documents: list[CorpusDocument] = []
    for tier_dir in sorted(path for path in (root / lang).iterdir() if path.is_dir()):
        tier = tier_dir.name
        if tier not in TIERS:
            raise DataError(f"Unknown tier directory {tier_dir}")
        stems = sorted(
            {path.stem for path in tier_dir.iterdir() if path.suffix in (TEXT_SUFFIX, DRS_SUFFIX)}
        )
        for split in stems:
            _check_group(lang, tier, split)
            documents.extend(_read_split(tier_dir, lang, tier, split))
    _LOGGER.debug("Read %d documents for %s", len(documents), lang)
    return documents


def _language_dirs(root: Path, langs: Iterable[str] | None) -> list[str]:
    """Return the language directories to read."""
    if not root.is_dir():
        raise DataError(f"Corpus root {root} is not a directory")
    present = sorted(
        path.name for path in root.iterdir() if path.is_dir() and not path.name.startswith(".")
    )
    for lang in present:
        check_language(lang)
    if langs is None:
        return present
    wanted = [check_language(lang) for lang in langs]
    return [lang for lang in wanted if lang in present]


def _read_manifest(root: Path) -> dict[str, Any] | None:
    path = root / MANIFEST_FILE
    if not path.is_file():
        return None
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as err:
        raise DataError(f"{path} is not valid JSON: {err}") from err
    return validate_manifest(data)


def _assemble(
    root: Path, per_language: Sequence[list[CorpusDocument]], langs: Sequence[str]
) -> CorpusSet:
    manifest = _read_manifest(root)
    corpus = CorpusSet.from_documents(
        (doc for docs in per_language for doc in docs),
        manifest[MANIFEST_RELEASE] if manifest else None,
    )
    if manifest:
        actual = {"/".join(key): n for key, n in corpus.counts().items()}
        for key, expected in manifest[MANIFEST_COUNTS].items():
            if key.split("/")[0] not in langs:
                continue
            if actual.get(key, 0) != expected:
                raise DataError(
                    f"{MANIFEST_FILE} lists {expected} documents for {key}, "
                    f"found {actual.get(key, 0)}"
                )
    _LOGGER.info("Ingested %d documents from %s", len(corpus), root)
    return corpus


def ingest(root: Path | str, langs: Iterable[str] | None = None) -> CorpusSet:
    """Read a corpus laid out as <lang>/<tier>/<split>.{txt,drs}."""
    root = Path(root)
    selected = _language_dirs(root, langs)
    return _assemble(root, [_read_language(root, lang) for lang in selected], selected)


async def async_ingest(root: Path | str, langs: Iterable[str] | None = None) -> CorpusSet:
    """Read language directories concurrently in the default executor."""
    root = Path(root)
    selected = _language_dirs(root, langs)
    loop = asyncio.get_running_loop()
    per_language = await asyncio.gather(
        *(loop.run_in_executor(None, _read_language, root, lang) for lang in selected)
    )
    return _assemble(root, per_language, selected)


@dataclass(frozen=True, slots=True)
class RemovedDocument:
    """A document dropped because its DRS cannot become a graph."""

    document: CorpusDocument
    report: IllFormedReport

    def to_dict(self) -> dict[str, Any]:
        """Return a JSON-serializable dict."""
        return {
            "id": self.document.id,
            "lang": self.document.lang,
            "tier": self.document.tier,
            "split": self.document.split,
            **self.report.to_dict(),
        }


def filter_convertible(
    corpus: CorpusSet, inventory: SymbolInventory | None = None, strict_scope: bool = False
) -> tuple[CorpusSet, list[RemovedDocument]]:
    """Remove documents whose DRS is ill-formed."""
    kept: dict[GroupKey, tuple[CorpusDocument, ...]] = {}
    removed: list[RemovedDocument] = []
    for key, docs in corpus.groups.items():
        retained = []
        for doc in docs:
            result = convert(doc.drs, inventory, strict_scope)
            if isinstance(result, IllFormedReport):
                _LOGGER.debug("Removing %s/%s: %s", doc.lang, doc.id, result.category)
                removed.append(RemovedDocument(doc, result))
            else:
                retained.append(doc)
        kept[key] = tuple(retained)
    if removed:
        _LOGGER.warning("Removed %d unconvertible documents", len(removed))
    return CorpusSet(kept, corpus.release), removed


@dataclass(frozen=True)
class CorpusStats:
    """Document counts by language, tier and split."""

    counts: dict[GroupKey, int]

    def get(self, lang: str, tier: str, split: str) -> int:
        """Return the count of one group."""
        return self.counts.get((lang, tier, split), 0)

    def to_dict(self) -> dict[str, int]:
        """Return counts keyed lang/tier/split."""
        return {"/".join(key): n for key, n in self.counts.items()}

    def render_table(self) -> str:
        """Render the counts as a language by tier/split table."""
        columns = [(TIER_GOLD, split) for split in SPLITS] + [
            (tier, SPLIT_TRAIN) for tier in TIERS if tier != TIER_GOLD
        ]
        header_top = ["Data type", "Gold", "", "", *(t.capitalize() for t, _ in columns[3:])]
        header = ["Lang", *(split.capitalize() for _, split in columns)]
        rows = [
            [LANGUAGE_NAMES[lang], *(f"{self.get(lang, t, s):,}" for t, s in columns)]
            for lang in LANGUAGES
        ]
        widths = [
            max(len(row[i]) for row in (header_top, header, *rows)) for i in range(len(header))
        ]

        def _line(cells: list[str]) -> str:
            first = cells[0].ljust(widths[0])
            rest = (cell.rjust(width) for cell, width in zip(cells[1:], widths[1:]))
            return "  ".join((first, *rest)).rstrip()

        return "\n".join(_line(cells) for cells in (header_top, header, *rows))


def stats(corpus: CorpusSet) -> CorpusStats:
    """Count documents for every valid (lang, tier, split)."""
    counts = {
        (lang, tier, split): len(corpus.group(lang, tier, split))
        for lang in LANGUAGES
        for tier in TIERS
        for split in SPLITS
        if tier == TIER_GOLD or split == SPLIT_TRAIN
    }
    return CorpusStats(counts)


def upsample(
    docs: Sequence[CorpusDocument], target: int, seed: int = DEFAULT_SEED
) -> list[CorpusDocument]:
    """Replicate the list and fill the remainder with a seeded sample."""
    if not docs:
        raise EmptyInputError(ERROR_EMPTY_INPUT)
    if target < len(docs):
        raise ConfigError(f"Upsampling target {target} is below the {len(docs)} documents")

    copies, remainder = divmod(target, len(docs))
    extra = random.Random(seed).sample(range(len(docs)), remainder)
    result = list(docs) * copies + [docs[index] for index in extra]
    _LOGGER.debug(
        "Upsampled %d documents to %d (%d copies + %d)", len(docs), target, copies, remainder
    )
    return result


def assemble_stage(
    corpus: CorpusSet,
    stage: str,
    langs: Iterable[str] | None = None,
    targets: Mapping[str, int] | None = None,
    seed: int = DEFAULT_SEED,
    pool_tiers: Iterable[str] = DEFAULT_POOL_TIERS,
) -> list[CorpusDocument]:
    """Select the training documents of a stage, upsampling where asked."""
    if stage not in STAGE_TIERS:
        raise ConfigError(f"Unknown stage {stage!r}, expected one of {sorted(STAGE_TIERS)}")
    tiers = STAGE_TIERS[stage]
    langs = [check_language(lang) for lang in (corpus.languages if langs is None else langs)]
    targets = targets or {}
    for lang in targets:
        check_language(lang)
    pool_tiers = tuple(pool_tiers)

    selected: list[CorpusDocument] = []
    for lang in langs:
        docs = corpus.documents([lang], tiers, [SPLIT_TRAIN])
        if lang not in targets:
            selected.extend(docs)
            continue
        pool = [doc for doc in docs if doc.tier in pool_tiers]
        rest = [doc for doc in docs if doc.tier not in pool_tiers]
        selected.extend(upsample(pool, targets[lang], seed))
        selected.extend(rest)
        _LOGGER.info("%s %s: upsampled %d to %d", stage, lang, len(pool), targets[lang])

    _LOGGER.info("Assembled %d documents for stage %s", len(selected), stage)
    return selected


def read_vocab(path: Path | str) -> list[str]:
    """Read a vocabulary with the token as the first field of each line."""
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as err:
        raise DataError(f"Cannot read vocabulary {path}: {err}") from err
    tokens = []
    for line in lines:
        if line.strip():
            tokens.append(line.split()[0])
    return tokens


def filter_vocab(
    base_vocab: Sequence[str],
    corpus_lines: Iterable[str],
    specials: Sequence[str] = (),
) -> list[str]:
    """Keep specials and the base tokens that occur in the corpora."""
    used = {token for line in corpus_lines for token in line.split()}
    retained = list(dict.fromkeys(specials))
    seen = set(retained)
    for token in base_vocab:
        if token in used and token not in seen:
            retained.append(token)
            seen.add(token)
    _LOGGER.info("Kept %d of %d vocabulary tokens", len(retained), len(base_vocab))
    return retained


def write_corpus(corpus: CorpusSet, root: Path | str) -> int:
    """Write a corpus back to the on-disk layout with a manifest."""
    root = Path(root)
    for (lang, tier, split), docs in corpus.groups.items():
        if not docs:
            continue
        directory = root / lang / tier
        directory.mkdir(parents=True, exist_ok=True)
        for suffix, values in (
            (TEXT_SUFFIX, [doc.text for doc in docs]),
            (DRS_SUFFIX, [doc.drs for doc in docs]),
            (IDS_SUFFIX, [doc.id for doc in docs]),
        ):
            (directory / f"{split}{suffix}").write_text(
                "".join(f"{value}\n" for value in values), encoding="utf-8"
            )

    manifest = {
        MANIFEST_RELEASE: corpus.release or "",
        MANIFEST_LANGUAGES: corpus.languages,
        MANIFEST_COUNTS: {"/".join(key): n for key, n in corpus.counts().items() if n},
    }
    root.mkdir(parents=True, exist_ok=True)
    (root / MANIFEST_FILE).write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    _LOGGER.info("Wrote %d documents to %s", len(corpus), root)
    return len(corpus)
