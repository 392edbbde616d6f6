"""Tests for the sequence notation lexer."""
from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from drs_toolkit.exceptions import ConfigError, LexError
from drs_toolkit.sequence_model import (
    SymbolInventory,
    TokenKind,
    classify_field,
    lex,
    repair_line,
    serialize,
)

from .conftest import GOLD_LINES, ILL_FORMED_LINES
from .strategies import drs_lines


class TestLex:
    """Classifying fields of a DRS line."""

    def test_named_entity(self, inventory: SymbolInventory) -> None:
        seq = lex('geological_formation.n.01 Name "Himalayas"', inventory)

        assert [token.kind for token in seq] == [
            TokenKind.CONCEPT,
            TokenKind.ROLE,
            TokenKind.CONSTANT_NAME,
        ]
        concept = seq[0]
        assert (concept.lemma, concept.pos, concept.sense) == ("geological_formation", "n", 1)
        assert seq[2].name == "Himalayas"

    def test_index_offsets(self) -> None:
        seq = lex("blind.a.01 Theme -3 Time -2")

        assert [token.offset for token in seq if token.kind == TokenKind.INDEX] == [-3, -2]

    def test_priority_order(self, inventory: SymbolInventory) -> None:
        assert classify_field("+1", inventory).kind == TokenKind.INDEX
        assert classify_field("now", inventory).kind == TokenKind.CONSTANT_DEICTIC
        assert classify_field("3", inventory).kind == TokenKind.CONSTANT_QUANTITY
        assert classify_field("2.5", inventory).kind == TokenKind.CONSTANT_QUANTITY
        assert classify_field("NEGATION", inventory).kind == TokenKind.DISCOURSE_RELATION
        assert classify_field("EQU", inventory).kind == TokenKind.OPERATOR
        assert classify_field("Agent", inventory).kind == TokenKind.ROLE
        assert classify_field("more_and_more.r.01", inventory).kind == TokenKind.CONCEPT

    @pytest.mark.parametrize(
        "surface",
        ["+0", "-0", "cat.n.00", "cat.x.01", "cat.n.1", "1/2", '"a"b"', '"a\\"', '"a\\b"'],
    )
    def test_rejected_fields(self, inventory: SymbolInventory, surface: str) -> None:
        assert classify_field(surface, inventory) is None

    def test_extra_space_in_name(self) -> None:
        with pytest.raises(LexError) as err:
            lex(ILL_FORMED_LINES[0])

        assert err.value.category == LexError.INVALID_TOKEN
        assert err.value.position == 2
        assert err.value.surface == '"'

    def test_missing_space(self) -> None:
        with pytest.raises(LexError) as err:
            lex(ILL_FORMED_LINES[2])

        assert err.value.position == 2
        assert err.value.surface == "+1technician.n.01"

    @pytest.mark.parametrize("line", ["", "   ", "\t"])
    def test_empty_line(self, line: str) -> None:
        with pytest.raises(LexError) as err:
            lex(line)

        assert err.value.category == LexError.EMPTY_LINE

    def test_custom_inventory(self) -> None:
        inventory = SymbolInventory.from_lists(["SAME"], ["BECAUSE"])

        seq = lex("cat.n.01 SAME +1 BECAUSE dog.n.01", inventory)

        assert seq[1].kind == TokenKind.OPERATOR
        assert seq[3].kind == TokenKind.DISCOURSE_RELATION
        # EQU is only an open-class role name here
        assert classify_field("EQU", inventory).kind == TokenKind.ROLE


class TestSerialize:
    """Serializing token sequences."""

    def test_single_token(self) -> None:
        assert serialize(lex("more_and_more.r.01")) == "more_and_more.r.01"

    def test_whitespace_normalized(self) -> None:
        assert serialize(lex("  blind.a.01   Theme -3\tTime -2 ")) == "blind.a.01 Theme -3 Time -2"

    @pytest.mark.parametrize("line", GOLD_LINES)
    def test_gold_lines_round_trip(self, line: str) -> None:
        assert serialize(lex(line)) == line

    def test_bundled_corpus_round_trip(self, well_formed_lines: list[str]) -> None:
        assert len(well_formed_lines) >= 500
        for line in well_formed_lines:
            assert serialize(lex(line)) == " ".join(line.split())

    @given(drs_lines)
    def test_relex_is_identical(self, line: str) -> None:
        seq = lex(line)

        assert lex(serialize(seq)) == seq

    @given(st.lists(st.sampled_from(["cat.n.01", "Agent", "-1", "now", "  "]), min_size=1))
    def test_classification_is_total(self, fields: list[str]) -> None:
        line = " ".join(fields)
        try:
            seq = lex(line)
        except LexError as err:
            assert err.category == LexError.EMPTY_LINE
        else:
            assert len(seq) == len(line.split())


class TestSymbolInventory:
    """Inventory validation."""

    def test_overlap_rejected(self) -> None:
        with pytest.raises(ConfigError):
            SymbolInventory.from_lists(["EQU"], ["EQU"])

    def test_lowercase_rejected(self) -> None:
        with pytest.raises(ConfigError):
            SymbolInventory.from_lists(["equ"], ["NEGATION"])


class TestRepairLine:
    """Post-processing of whitespace errors."""

    @pytest.mark.parametrize(
        ("line", "expected"),
        list(zip(ILL_FORMED_LINES[:2], GOLD_LINES[:2]))
        + [("person.n.01 Role +1technician.n.01", "person.n.01 Role +1 technician.n.01")],
    )
    def test_repairs(self, line: str, expected: str) -> None:
        repaired, fixes = repair_line(line)

        assert repaired == expected
        assert len(fixes) == 1
        lex(repaired)

    def test_well_formed_unchanged(self) -> None:
        assert repair_line("person.n.01 Role +1 engineer.n.01") == (
            "person.n.01 Role +1 engineer.n.01",
            [],
        )

    def test_unfixable_left_alone(self) -> None:
        repaired, fixes = repair_line("person.n.01 Role ???")

        assert repaired == "person.n.01 Role ???"
        assert fixes == []
