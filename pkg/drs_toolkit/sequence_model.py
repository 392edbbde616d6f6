"""Lexer and serializer for the variable-free sequential DRS notation."""
from __future__ import annotations

import logging
import re
from collections.abc import Iterable, Iterator
from dataclasses import dataclass, field
from enum import StrEnum

from .const import (
    DEFAULT_DISCOURSE_RELATIONS,
    DEFAULT_OPERATORS,
    DEICTIC_CONSTANTS,
    ERROR_INVENTORY_CASE,
    ERROR_INVENTORY_OVERLAP,
)
from .exceptions import ConfigError, LexError

_LOGGER = logging.getLogger(__name__)

INDEX_RE = re.compile(r"^[+-][0-9]+$")
QUANTITY_RE = re.compile(r"^[0-9]+(?:\.[0-9]+)?$")
NAME_RE = re.compile(r'^"[^"\\]+"$')
CONCEPT_RE = re.compile(r"^(?P<lemma>\w[\w'\-.]*)\.(?P<pos>[nvar])\.(?P<sense>[0-9]{2})$")
ROLE_RE = re.compile(r"^[A-Z][A-Za-z]*$")
INVENTORY_NAME_RE = re.compile(r"^[A-Z]+$")
FUSED_INDEX_RE = re.compile(r"^(?P<index>[+-][0-9]+)(?P<rest>\S+)$")


class TokenKind(StrEnum):
    """Lexical class of a sequence token."""

    CONCEPT = "Concept"
    ROLE = "Role"
    OPERATOR = "Operator"
    DISCOURSE_RELATION = "DiscourseRelation"
    INDEX = "Index"
    CONSTANT_NAME = "ConstantName"
    CONSTANT_DEICTIC = "ConstantDeictic"
    CONSTANT_QUANTITY = "ConstantQuantity"


CONSTANT_KINDS = frozenset(
    (TokenKind.CONSTANT_NAME, TokenKind.CONSTANT_DEICTIC, TokenKind.CONSTANT_QUANTITY)
)


@dataclass(frozen=True, slots=True)
class Token:
    """A classified token with its kind-specific payload."""

    kind: TokenKind
    surface: str
    lemma: str | None = None
    pos: str | None = None
    sense: int | None = None
    offset: int | None = None
    name: str | None = None

    @property
    def is_constant(self) -> bool:
        """Return True for name, deictic and quantity constants."""
        return self.kind in CONSTANT_KINDS

    @property
    def is_argument(self) -> bool:
        """Return True for tokens that can follow a role or operator."""
        return self.kind == TokenKind.INDEX or self.is_constant


@dataclass(frozen=True)
class TokenSequence:
    """An accepted DRS line as an ordered list of tokens."""

    tokens: tuple[Token, ...]
    raw: str = field(default="", compare=False)

    def __iter__(self) -> Iterator[Token]:
        return iter(self.tokens)

    def __len__(self) -> int:
        return len(self.tokens)

    def __getitem__(self, index: int) -> Token:
        return self.tokens[index]


@dataclass(frozen=True)
class SymbolInventory:
    """Closed classes of comparison operators and discourse relations."""

    operators: frozenset[str] = frozenset(DEFAULT_OPERATORS)
    discourse_relations: frozenset[str] = frozenset(DEFAULT_DISCOURSE_RELATIONS)

    def __post_init__(self) -> None:
        """Validate the inventory."""
        for name in (*self.operators, *self.discourse_relations):
            if not INVENTORY_NAME_RE.match(name):
                raise ConfigError(f"{ERROR_INVENTORY_CASE}: {name!r}")
        if overlap := self.operators & self.discourse_relations:
            raise ConfigError(f"{ERROR_INVENTORY_OVERLAP}: {sorted(overlap)}")

    @classmethod
    def from_lists(
        cls, operators: Iterable[str], discourse_relations: Iterable[str]
    ) -> SymbolInventory:
        """Create an inventory from plain lists."""
        return cls(frozenset(operators), frozenset(discourse_relations))


DEFAULT_INVENTORY = SymbolInventory()


def classify_field(surface: str, inventory: SymbolInventory) -> Token | None:
    """Classify one whitespace-delimited field, or return None."""
    if INDEX_RE.match(surface):
        offset = int(surface)
        if offset == 0:
            return None
        return Token(TokenKind.INDEX, surface, offset=offset)
    if NAME_RE.match(surface):
        return Token(TokenKind.CONSTANT_NAME, surface, name=surface[1:-1])
    if surface in DEICTIC_CONSTANTS:
        return Token(TokenKind.CONSTANT_DEICTIC, surface)
    if QUANTITY_RE.match(surface):
        return Token(TokenKind.CONSTANT_QUANTITY, surface)
    if surface in inventory.discourse_relations:
        return Token(TokenKind.DISCOURSE_RELATION, surface)
    if surface in inventory.operators:
        return Token(TokenKind.OPERATOR, surface)
    if match := CONCEPT_RE.match(surface):
        sense = int(match["sense"])
        if sense == 0:
            return None
        return Token(
            TokenKind.CONCEPT,
            surface,
            lemma=match["lemma"],
            pos=match["pos"],
            sense=sense,
        )
    if ROLE_RE.match(surface):
        return Token(TokenKind.ROLE, surface)
    return None


def lex(line: str, inventory: SymbolInventory | None = None) -> TokenSequence:
    """Lex a DRS line into a token sequence."""
    inventory = inventory or DEFAULT_INVENTORY
    fields = tuple(line.split())
    if not fields:
        raise LexError(LexError.EMPTY_LINE)

    tokens = []
    for position, surface in enumerate(fields):
        token = classify_field(surface, inventory)
        if token is None:
            raise LexError(LexError.INVALID_TOKEN, position, surface, fields)
        tokens.append(token)
    return TokenSequence(tuple(tokens), raw=line)


def serialize(seq: TokenSequence) -> str:
    """Serialize a token sequence back into its line form."""
    return " ".join(token.surface for token in seq)


def is_concept(surface: str) -> bool:
    """Return True if the surface has the synset shape."""
    match = CONCEPT_RE.match(surface)
    return bool(match) and int(match["sense"]) != 0


def repair_line(
    line: str, inventory: SymbolInventory | None = None
) -> tuple[str, list[str]]:
    """Fix whitespace errors that keep a line from lexing."""
    inventory = inventory or DEFAULT_INVENTORY
    fields = line.split()
    fixes: list[str] = []

    changed = True
    while changed:
        changed = False
        for position, surface in enumerate(fields):
            if classify_field(surface, inventory) is not None:
                continue
            following = fields[position + 1] if position + 1 < len(fields) else None

            if surface.startswith('"'):
                end = _closing_quote(fields, position)
                if end is not None:
                    fields[position : end + 1] = ["".join(fields[position : end + 1])]
                    fixes.append(f"joined split name at field {position}")
                    changed = True
                    break

            if match := FUSED_INDEX_RE.match(surface):
                rest = match["rest"]
                if classify_field(match["index"], inventory) and classify_field(
                    rest, inventory
                ):
                    fields[position : position + 1] = [match["index"], rest]
                    fixes.append(f"split fused index at field {position}")
                    changed = True
                    break

            if following is not None and is_concept(surface + following):
                fields[position : position + 2] = [surface + following]
                fixes.append(f"joined split concept at field {position}")
                changed = True
                break

    repaired = " ".join(fields)
    if fixes:
        _LOGGER.debug("Repaired %r -> %r (%s)", line, repaired, ", ".join(fixes))
    return repaired, fixes


def _closing_quote(fields: list[str], start: int) -> int | None:
    """Return the field index that closes a quoted name opened at start."""
    if fields[start] != '"' and fields[start].endswith('"'):
        return None
    for position in range(start + 1, len(fields)):
        if fields[position].endswith('"'):
            return position
        if '"' in fields[position]:
            return None
    return None
