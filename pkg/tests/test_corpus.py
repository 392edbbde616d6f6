"""Tests for corpus ingestion, filtering and stage assembly."""
from __future__ import annotations

import json
from collections import Counter
from collections.abc import Callable
from pathlib import Path

import pytest

from drs_toolkit.const import MANIFEST_FILE, STAGE_FFT, STAGE_PT, STAGE_SFT
from drs_toolkit.corpus import (
    CorpusDocument,
    CorpusSet,
    assemble_stage,
    async_ingest,
    filter_convertible,
    filter_vocab,
    ingest,
    read_vocab,
    stats,
    upsample,
    write_corpus,
)
from drs_toolkit.exceptions import (
    ConfigError,
    DataError,
    EmptyInputError,
    MisalignedFilesError,
    MissingSplitError,
    UnknownLanguageError,
)
from drs_toolkit.graph import IllFormedCategory

TIERED = {
    "en": {
        "gold": {"train": [("A cat .", "cat.n.01")]},
        "silver": {"train": [("A dog .", "dog.n.01")]},
        "bronze": {"train": [("A man .", "man.n.01"), ("A hat .", "hat.n.01")]},
    },
    "nl": {
        "gold": {"train": [("Een kat .", "cat.n.01")]},
        "silver": {"train": [("Een hond .", "dog.n.01")]},
        "bronze": {"train": [("Een man .", "man.n.01")]},
    },
}
ONE_CAT = {"en": {"gold": {"train": [("A cat .", "cat.n.01")]}}}


def _docs(n: int, lang: str = "nl") -> list[CorpusDocument]:
    return [
        CorpusDocument(f"gold/train/{i:06d}", lang, "gold", "train", f"zin {i}", "cat.n.01")
        for i in range(n)
    ]


class TestIngest:
    """Reading corpora from disk."""

    def test_parallel_corpus(self, parallel_corpus: Path) -> None:
        corpus = ingest(parallel_corpus)

        assert len(corpus) == 18
        assert corpus.languages == ["en", "de", "nl"]
        train = corpus.group("en", "gold", "train")
        assert [doc.id for doc in train] == [f"pmb/gold/train/{i:02d}" for i in range(3)]
        assert train[1].drs == 'female.n.02 Name "Maria"'
        assert train[1].text == "Maria ."

    def test_language_selection(self, parallel_corpus: Path) -> None:
        assert ingest(parallel_corpus, ["nl"]).languages == ["nl"]

    async def test_async_matches_sync(self, parallel_corpus: Path) -> None:
        assert await async_ingest(parallel_corpus) == ingest(parallel_corpus)

    def test_ids_file(self, make_corpus: Callable[..., Path]) -> None:
        root = make_corpus(
            {"en": {"gold": {"dev": [("A cat .", "cat.n.01")]}}},
            ids={("en", "gold", "dev"): ["pmb-00/1234"]},
        )

        assert [doc.id for doc in ingest(root).documents()] == ["pmb-00/1234"]

    def test_unknown_language(self, make_corpus: Callable[..., Path]) -> None:
        root = make_corpus({"fr": {"gold": {"train": [("Un chat .", "cat.n.01")]}}})

        with pytest.raises(UnknownLanguageError):
            ingest(root)

    def test_missing_drs_file(self, parallel_corpus: Path) -> None:
        (parallel_corpus / "de" / "gold" / "dev.drs").unlink()

        with pytest.raises(MissingSplitError):
            ingest(parallel_corpus)

    def test_misaligned_lines(self, parallel_corpus: Path) -> None:
        path = parallel_corpus / "en" / "gold" / "train.txt"
        path.write_text(path.read_text(encoding="utf-8") + "Extra .\n", encoding="utf-8")

        with pytest.raises(MisalignedFilesError):
            ingest(parallel_corpus)

    def test_silver_has_only_train(self, make_corpus: Callable[..., Path]) -> None:
        root = make_corpus({"en": {"silver": {"dev": [("A cat .", "cat.n.01")]}}})

        with pytest.raises(DataError):
            ingest(root)

    def test_empty_drs(self, make_corpus: Callable[..., Path]) -> None:
        root = make_corpus({"en": {"gold": {"train": [("A cat .", " ")]}}})

        with pytest.raises(DataError):
            ingest(root)

    def test_manifest(self, make_corpus: Callable[..., Path]) -> None:
        manifest = {"release": "5.0.0", "languages": ["en"], "counts": {"en/gold/train": 1}}
        root = make_corpus(ONE_CAT, manifest=manifest)

        assert ingest(root).release == "5.0.0"

    def test_manifest_count_mismatch(self, make_corpus: Callable[..., Path]) -> None:
        manifest = {"release": "5.0.0", "languages": ["en"], "counts": {"en/gold/train": 2}}
        root = make_corpus(ONE_CAT, manifest=manifest)

        with pytest.raises(DataError):
            ingest(root)

    def test_invalid_manifest(self, make_corpus: Callable[..., Path]) -> None:
        root = make_corpus({"en": {"gold": {"train": [("A cat .", "cat.n.01")]}}})
        (root / MANIFEST_FILE).write_text("{not json", encoding="utf-8")

        with pytest.raises(DataError):
            ingest(root)

    def test_not_a_directory(self, tmp_path: Path) -> None:
        with pytest.raises(DataError):
            ingest(tmp_path / "missing")

    def test_duplicate_ids(self) -> None:
        doc = _docs(1)[0]

        with pytest.raises(DataError):
            CorpusSet.from_documents([doc, doc])


class TestFilterAndStats:
    """Convertibility filter and document counts."""

    def test_filter_convertible(self, make_corpus: Callable[..., Path]) -> None:
        root = make_corpus(
            {
                "en": {
                    "gold": {
                        "train": [
                            ("A cat .", "cat.n.01"),
                            ("He is a technician .", "person.n.01 Role +1technician.n.01"),
                        ]
                    }
                }
            }
        )

        kept, removed = filter_convertible(ingest(root))

        assert len(kept) == 1
        assert [r.document.text for r in removed] == ["He is a technician ."]
        assert removed[0].report.category == IllFormedCategory.MISSING_SPACE
        assert removed[0].to_dict()["id"] == "en/gold/train/000001"

    def test_filter_strict_scope(self, make_corpus: Callable[..., Path]) -> None:
        root = make_corpus(
            {"en": {"gold": {"train": [("A cat .", "cat.n.01"), ("No .", "cat.n.01 NEGATION")]}}}
        )

        assert len(filter_convertible(ingest(root))[0]) == 2
        kept, removed = filter_convertible(ingest(root), strict_scope=True)
        assert len(kept) == 1
        assert removed[0].report.category == IllFormedCategory.RELATION_WITHOUT_SCOPE

    def test_stats(self, parallel_corpus: Path) -> None:
        counts = stats(ingest(parallel_corpus))

        assert counts.get("de", "gold", "train") == 3
        assert counts.get("de", "silver", "train") == 1
        assert counts.get("it", "gold", "train") == 0
        assert counts.to_dict()["nl/gold/test"] == 1
        assert ("en", "silver", "dev") not in counts.counts

    def test_render_table(self, parallel_corpus: Path) -> None:
        lines = stats(ingest(parallel_corpus)).render_table().splitlines()

        assert lines[0].startswith("Data type")
        assert lines[1].split() == ["Lang", "Train", "Dev", "Test", "Train", "Train"]
        assert lines[2].split() == ["English", "3", "1", "1", "1", "0"]
        assert lines[4].split() == ["Italian", "0", "0", "0", "0", "0"]


class TestStages:
    """Upsampling and stage selection."""

    def test_upsample_counts(self) -> None:
        docs = _docs(1898)

        result = upsample(docs, 100_000, seed=0)

        assert len(result) == 100_000
        copies = Counter(doc.id for doc in result)
        assert set(copies.values()) == {52, 53}
        assert sum(1 for n in copies.values() if n == 53) == 100_000 - 52 * 1898

    def test_upsample_is_seeded(self) -> None:
        docs = _docs(7)

        assert upsample(docs, 30, seed=3) == upsample(docs, 30, seed=3)

    def test_upsample_errors(self) -> None:
        with pytest.raises(EmptyInputError):
            upsample([], 10)
        with pytest.raises(ConfigError):
            upsample(_docs(5), 4)

    def test_stage_tiers(self, make_corpus: Callable[..., Path]) -> None:
        corpus = ingest(make_corpus(TIERED))

        assert len(assemble_stage(corpus, STAGE_PT)) == 7
        assert len(assemble_stage(corpus, STAGE_FFT, ["en"])) == 4
        sft = assemble_stage(corpus, STAGE_SFT)
        assert {doc.tier for doc in sft} == {"gold", "silver"}
        assert [doc.lang for doc in sft] == ["en", "en", "nl", "nl"]

    def test_stage_upsamples_pool(self, make_corpus: Callable[..., Path]) -> None:
        corpus = ingest(make_corpus(TIERED))

        docs = assemble_stage(corpus, STAGE_PT, ["nl"], {"nl": 10})

        assert len(docs) == 11
        assert Counter(doc.tier for doc in docs) == {"gold": 5, "silver": 5, "bronze": 1}

    def test_stage_errors(self, make_corpus: Callable[..., Path]) -> None:
        corpus = ingest(make_corpus(TIERED))

        with pytest.raises(ConfigError):
            assemble_stage(corpus, "XFT")
        with pytest.raises(UnknownLanguageError):
            assemble_stage(corpus, STAGE_PT, targets={"fr": 10})


class TestVocabAndWrite:
    """Vocabulary filtering and corpus output."""

    def test_filter_vocab(self) -> None:
        base = ["the", "cat", "dog", "<mask>", "sat"]

        kept = filter_vocab(base, ["the cat sat", "cat"], ["<drs>", "<mask>"])

        assert kept == ["<drs>", "<mask>", "the", "cat", "sat"]

    def test_read_vocab(self, tmp_path: Path) -> None:
        path = tmp_path / "vocab.txt"
        path.write_text("the 120\ncat 5\n\ndog\n", encoding="utf-8")

        assert read_vocab(path) == ["the", "cat", "dog"]
        with pytest.raises(DataError):
            read_vocab(tmp_path / "missing.txt")

    def test_round_trip(self, parallel_corpus: Path, tmp_path: Path) -> None:
        corpus = ingest(parallel_corpus)

        assert write_corpus(corpus, tmp_path / "copy") == 18

        copy = ingest(tmp_path / "copy")
        assert copy.documents() == corpus.documents()
        manifest = json.loads((tmp_path / "copy" / MANIFEST_FILE).read_text(encoding="utf-8"))
        assert manifest["languages"] == ["en", "de", "nl"]
        assert manifest["counts"]["en/gold/train"] == 3

    def test_write_empty(self, tmp_path: Path) -> None:
        assert write_corpus(CorpusSet(), tmp_path / "empty") == 0
        assert (tmp_path / "empty" / MANIFEST_FILE).is_file()
