"""Tests for Smatch scoring and difference classification."""
from __future__ import annotations

import json
import random
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import given
from hypothesis import strategies as st

from drs_toolkit.exceptions import (
    ConfigError,
    DataError,
    MisalignedFilesError,
    OracleBoundError,
)
from drs_toolkit.graph import IllFormedCategory, build_graph
from drs_toolkit.penman_codec import TripleSet, drg_triples
from drs_toolkit.sequence_model import lex
from drs_toolkit.smatch import (
    DiffCategory,
    DiffFinding,
    VariableMapping,
    aligned_score,
    classify_diff,
    corpus_f1,
    read_line_pairs,
    smatch_oracle,
    smatch_score,
)

from .strategies import random_drs_line


def _triples(line: str) -> TripleSet:
    return drg_triples(build_graph(lex(line)))


def _small_line(rng: random.Random) -> str:
    return random_drs_line(rng, max_entities=7, relations=False)


small_lines = st.builds(_small_line, st.randoms(use_true_random=False))


class TestSmatchScore:
    """Hill climbing and the exhaustive oracle."""

    def test_cat_dog(self) -> None:
        cat, dog = _triples("cat.n.01"), _triples("dog.n.01")

        for score in (smatch_score(cat, dog), smatch_oracle(cat, dog)):
            assert (score.matched, score.total_system, score.total_gold) == (2, 3, 3)
            assert score.f1_exact == Fraction(2, 3)
            assert score.precision == score.recall == pytest.approx(2 / 3)

    def test_identical_graphs(self) -> None:
        for i in range(100):
            triples = _triples(random_drs_line(random.Random(i)))
            assert smatch_score(triples, triples, restarts=8).f1 == 1.0

    def test_agrees_with_oracle(self) -> None:
        agree = 0
        for i in range(200):
            rng = random.Random(i)
            system, gold = _triples(_small_line(rng)), _triples(_small_line(rng))
            climbed = smatch_score(system, gold, restarts=8, seed=i)
            optimal = smatch_oracle(system, gold)
            assert climbed.f1_exact <= optimal.f1_exact
            agree += climbed.f1_exact == optimal.f1_exact

        assert agree >= 198

    @given(small_lines, small_lines)
    def test_oracle_f1_is_symmetric(self, left: str, right: str) -> None:
        a, b = _triples(left), _triples(right)
        forward, backward = smatch_oracle(a, b), smatch_oracle(b, a)

        assert forward.f1_exact == backward.f1_exact
        assert forward.precision == backward.recall

    def test_adding_gold_triple_never_decreases(self) -> None:
        for i in range(50):
            rng = random.Random(i)
            system, gold = _triples(_small_line(rng)), _triples(_small_line(rng))
            extended = TripleSet(
                system.instances,
                system.relations,
                (*system.attributes, ("e0", ":Name", '"Extra"')),
                system.top,
            )
            widened_gold = TripleSet(
                gold.instances,
                gold.relations,
                (*gold.attributes, ("e0", ":Name", '"Extra"')),
                gold.top,
            )
            before = smatch_oracle(system, widened_gold).matched
            assert smatch_oracle(extended, widened_gold).matched >= before

    def test_deterministic(self) -> None:
        rng = random.Random(7)
        system, gold = _triples(_small_line(rng)), _triples(_small_line(rng))

        assert smatch_score(system, gold, seed=3) == smatch_score(system, gold, seed=3)

    def test_mapping_is_injective(self) -> None:
        score = smatch_score(_triples("cat.n.01 dog.n.01"), _triples("dog.n.01 cat.n.01"))

        assert score.mapping.as_dict() == {"b0": "b0", "e0": "e1", "e1": "e0"}
        with pytest.raises(ValueError):
            VariableMapping((("e0", "e1"), ("e1", "e1")))

    def test_restarts_must_be_positive(self) -> None:
        with pytest.raises(ConfigError):
            smatch_score(_triples("cat.n.01"), _triples("cat.n.01"), restarts=0)

    def test_oracle_bound(self) -> None:
        line = " ".join(["cat.n.01"] * 9)

        with pytest.raises(OracleBoundError):
            smatch_oracle(_triples(line), _triples(line))
        assert aligned_score(_triples(line), _triples(line), 4, 0).f1 == 1.0


class TestCorpusF1:
    """Micro-averaged corpus scoring."""

    def test_reference_fixture(self, fixtures_dir: Path) -> None:
        reference = json.loads((fixtures_dir / "smatch_reference.json").read_text())
        pairs = read_line_pairs(fixtures_dir / "system.drs", fixtures_dir / "gold.drs")

        result = corpus_f1(pairs)

        assert result.score.matched == reference["matched"]
        assert result.score.total_system == reference["total_system"]
        assert result.score.total_gold == reference["total_gold"]
        assert result.score.f1_exact == Fraction(reference["f1"])
        assert result.err == pytest.approx(100 * float(Fraction(reference["err"])))
        assert (result.n_docs, result.n_ill_formed) == (
            reference["n_docs"],
            reference["n_ill_formed"],
        )

    def test_ill_formed_system_line(self, fixtures_dir: Path) -> None:
        pairs = read_line_pairs(fixtures_dir / "system.drs", fixtures_dir / "gold.drs")

        document = corpus_f1(pairs).documents[2]

        assert (document.matched, document.total_system, document.total_gold) == (0, 0, 6)
        assert document.report.category == IllFormedCategory.MISSING_SPACE

    def test_jobs_give_same_result(self, fixtures_dir: Path) -> None:
        pairs = read_line_pairs(fixtures_dir / "system.drs", fixtures_dir / "gold.drs")

        assert corpus_f1(pairs, jobs=2) == corpus_f1(pairs, jobs=1)

    def test_identical_files(self, well_formed_lines: list[str]) -> None:
        result = corpus_f1([(line, line) for line in well_formed_lines[:50]])

        assert result.score.f1 == 1.0
        assert result.err == 0.0

    def test_strict_scope(self) -> None:
        pairs = [("cat.n.01 NEGATION", "cat.n.01")]

        assert corpus_f1(pairs).n_ill_formed == 0
        result = corpus_f1(pairs, strict_scope=True)
        assert (result.n_ill_formed, result.err) == (1, 100.0)
        assert result.documents[0].report.category == IllFormedCategory.RELATION_WITHOUT_SCOPE

    def test_ill_formed_gold_line(self) -> None:
        with pytest.raises(DataError):
            corpus_f1([("cat.n.01", "cat.n.01 Agent")])

    def test_misaligned_files(self, tmp_path: Path) -> None:
        system, gold = tmp_path / "system.drs", tmp_path / "gold.drs"
        system.write_text("cat.n.01\n", encoding="utf-8")
        gold.write_text("cat.n.01\ndog.n.01\n", encoding="utf-8")

        with pytest.raises(MisalignedFilesError):
            read_line_pairs(system, gold)

    def test_missing_file(self, tmp_path: Path) -> None:
        with pytest.raises(DataError):
            read_line_pairs(tmp_path / "missing.drs", tmp_path / "missing.drs")


class TestClassifyDiff:
    """Semantic difference categories."""

    @staticmethod
    def _diff(system: str, gold: str) -> list[DiffFinding]:
        return list(classify_diff(lex(system), lex(gold)))

    def test_wrong_role(self) -> None:
        findings = self._diff(
            "person.n.01 time.n.08 TPR now eye.n.01 blind.a.01 Experiencer -3 Time -2",
            "person.n.01 time.n.08 TPR now eye.n.01 blind.a.01 Theme -3 Time -2",
        )

        assert findings == [DiffFinding(DiffCategory.WRONG_ROLE, "Experiencer", "Theme")]

    def test_wrong_concept(self) -> None:
        findings = self._diff(
            "person.n.01 overtreibe.v.01 Patient -1 Time +1 time.n.08 TPR now",
            "person.n.01 exaggerate.v.01 Agent -1 Time +1 time.n.08 TPR now",
        )

        assert findings == [
            DiffFinding(DiffCategory.WRONG_CONCEPT, "overtreibe.v.01", "exaggerate.v.01"),
            DiffFinding(DiffCategory.WRONG_ROLE, "Patient", "Agent"),
        ]

    def test_wrong_index(self) -> None:
        findings = self._diff(
            "person.n.01 time.n.08 drive.v.01 Agent -1",
            "person.n.01 time.n.08 drive.v.01 Agent -2",
        )

        assert findings == [DiffFinding(DiffCategory.WRONG_INDEX, "Agent -1", "Agent -2")]

    def test_extra_tokens(self) -> None:
        findings = self._diff("more_and_more.a.01 Degree +1 more.r.01", "more_and_more.r.01")

        assert findings[0] == DiffFinding(
            DiffCategory.WRONG_CONCEPT, "more_and_more.a.01", "more_and_more.r.01"
        )
        assert {finding.category for finding in findings[1:]} == {DiffCategory.EXTRA_TOKEN}
        assert DiffFinding(DiffCategory.EXTRA_TOKEN, "Degree +1", "") in findings

    def test_missing_token(self) -> None:
        findings = self._diff("cat.n.01", 'cat.n.01 Name "Tom"')

        assert findings == [DiffFinding(DiffCategory.MISSING_TOKEN, "", 'Name "Tom"')]

    def test_identical(self) -> None:
        report = classify_diff(lex("cat.n.01 EQU now"), lex("cat.n.01 EQU now"))

        assert len(report) == 0
        assert report.score.f1 == 1.0
