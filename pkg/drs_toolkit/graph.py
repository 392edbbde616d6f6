"""Discourse Representation Graph construction, validation and linearization."""
from __future__ import annotations

import json
import logging
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from enum import StrEnum
from typing import Any

import networkx as nx

from .const import (
    CONSTANT_PREFIX,
    CONTEXT_LABEL,
    CONTEXT_PREFIX,
    ENTITY_PREFIX,
    ERROR_EMPTY_INPUT,
    MEMBERSHIP_LABEL,
    ROOT_CONTEXT_ID,
)
from .exceptions import (
    EmptyInputError,
    GraphInvariantError,
    IllFormedError,
    LexError,
)
from .sequence_model import (
    FUSED_INDEX_RE,
    SymbolInventory,
    Token,
    TokenKind,
    TokenSequence,
    is_concept,
    lex,
)

_LOGGER = logging.getLogger(__name__)


class NodeKind(StrEnum):
    """Kind of a graph node."""

    CONTEXT = "Context"
    ENTITY = "Entity"
    CONSTANT = "Constant"


class EdgeKind(StrEnum):
    """Kind of a graph edge."""

    ROLE = "Role"
    OPERATOR = "Operator"
    DISCOURSE_RELATION = "DiscourseRelation"
    MEMBERSHIP = "Membership"


class IllFormedCategory(StrEnum):
    """Reason a sequence cannot be turned into a graph."""

    INVALID_TOKEN = "InvalidToken"
    EXTRA_SPACE = "ExtraSpace"
    MISSING_SPACE = "MissingSpace"
    DANGLING_ROLE = "DanglingRole"
    UNRESOLVABLE_INDEX = "UnresolvableIndex"
    RELATION_WITHOUT_SCOPE = "RelationWithoutScope"
    EMPTY_GRAPH = "EmptyGraph"


@dataclass(frozen=True, slots=True)
class Node:
    """A context, entity or constant node."""

    id: str
    kind: NodeKind
    label: str
    # field index of the token that introduced the node
    position: int | None = None
    # explicit context hook written after a discourse relation
    hook: int | None = None


@dataclass(frozen=True, slots=True)
class Edge:
    """A labelled edge between two nodes."""

    src: str
    dst: str
    label: str
    kind: EdgeKind
    position: int | None = None


@dataclass(frozen=True, slots=True)
class IllFormedReport:
    """Why a line could not be converted into a graph."""

    category: IllFormedCategory
    detail: str
    position: int

    def to_dict(self) -> dict[str, Any]:
        """Return a JSON-serializable dict."""
        return {
            "category": str(self.category),
            "detail": self.detail,
            "position": self.position,
        }


@dataclass(frozen=True)
class Drg:
    """A Discourse Representation Graph."""

    nodes: tuple[Node, ...]
    edges: tuple[Edge, ...]
    root: str = ROOT_CONTEXT_ID

    def __post_init__(self) -> None:
        """Check the graph invariants."""
        validate_drg(self)

    def node(self, node_id: str) -> Node:
        """Return the node with the given id."""
        for node in self.nodes:
            if node.id == node_id:
                return node
        raise KeyError(node_id)

    @property
    def contexts(self) -> list[Node]:
        """Return context nodes in introduction order."""
        return [node for node in self.nodes if node.kind == NodeKind.CONTEXT]

    @property
    def entities(self) -> list[Node]:
        """Return entity nodes in introduction order."""
        return [node for node in self.nodes if node.kind == NodeKind.ENTITY]

    @property
    def constants(self) -> list[Node]:
        """Return constant nodes."""
        return [node for node in self.nodes if node.kind == NodeKind.CONSTANT]

    @property
    def variable_nodes(self) -> list[Node]:
        """Return the nodes that become variables in triple form."""
        return [node for node in self.nodes if node.kind != NodeKind.CONSTANT]

    def outgoing(self, node_id: str) -> list[Edge]:
        """Return outgoing edges of a node in introduction order."""
        return [edge for edge in self.edges if edge.src == node_id]

    def to_networkx(self) -> nx.MultiDiGraph:
        """Return the graph as a networkx multigraph."""
        graph = nx.MultiDiGraph(root=self.root)
        for node in self.nodes:
            graph.add_node(node.id, kind=str(node.kind), label=node.label)
        for edge in self.edges:
            graph.add_edge(edge.src, edge.dst, kind=str(edge.kind), label=edge.label)
        return graph

    def to_dict(self) -> dict[str, Any]:
        """Return the JSON export form."""
        return {
            "nodes": [
                {"id": node.id, "kind": str(node.kind), "label": node.label}
                for node in self.nodes
            ],
            "edges": [
                {
                    "src": edge.src,
                    "dst": edge.dst,
                    "label": edge.label,
                    "kind": str(edge.kind),
                }
                for edge in self.edges
            ],
            "root": self.root,
        }

    def to_json(self) -> str:
        """Return the graph as a JSON string."""
        return json.dumps(self.to_dict(), ensure_ascii=False)


def validate_drg(g: Drg) -> None:
    """Raise GraphInvariantError if the graph is not a well-formed DRG."""
    kinds = {node.id: node.kind for node in g.nodes}
    if len(kinds) != len(g.nodes):
        raise GraphInvariantError("Node ids are not unique")
    if kinds.get(g.root) != NodeKind.CONTEXT:
        raise GraphInvariantError(f"Root {g.root!r} is not a context node")

    membership: dict[str, int] = {}
    contexts = nx.DiGraph()
    contexts.add_nodes_from(n for n, kind in kinds.items() if kind == NodeKind.CONTEXT)
    for edge in g.edges:
        src_kind, dst_kind = kinds.get(edge.src), kinds.get(edge.dst)
        if src_kind is None or dst_kind is None:
            raise GraphInvariantError(f"Edge {edge} refers to an unknown node")
        if edge.kind == EdgeKind.MEMBERSHIP:
            if src_kind != NodeKind.CONTEXT or dst_kind != NodeKind.ENTITY:
                raise GraphInvariantError(f"Membership edge {edge} must link context to entity")
            membership[edge.dst] = membership.get(edge.dst, 0) + 1
        elif edge.kind == EdgeKind.DISCOURSE_RELATION:
            if src_kind != NodeKind.CONTEXT or dst_kind != NodeKind.CONTEXT:
                raise GraphInvariantError(f"Relation edge {edge} must link two contexts")
            contexts.add_edge(edge.src, edge.dst)
        elif src_kind != NodeKind.ENTITY or dst_kind == NodeKind.CONTEXT:
            raise GraphInvariantError(f"Edge {edge} must start at an entity")

    for node_id, kind in kinds.items():
        if kind == NodeKind.ENTITY and membership.get(node_id) != 1:
            raise GraphInvariantError(f"Entity {node_id} needs exactly one membership edge")

    roots = [n for n, degree in contexts.in_degree() if degree == 0]
    if roots != [g.root]:
        raise GraphInvariantError(f"Expected single root context {g.root}, found {roots}")
    if not nx.is_arborescence(contexts):
        raise GraphInvariantError("Contexts do not form a tree")


def _report(category: IllFormedCategory, detail: str, position: int) -> IllFormedError:
    return IllFormedError(IllFormedReport(category, detail, position))


def build_graph(seq: TokenSequence, strict_scope: bool = False) -> Drg:
    """Build a DRG from a lexed sequence, raising IllFormedError on failure."""
    tokens = seq.tokens
    nodes = [Node(ROOT_CONTEXT_ID, NodeKind.CONTEXT, CONTEXT_LABEL)]
    edges: list[Edge] = []
    # (edge slot, source rank, offset, index position) for forward hooks
    pending: list[tuple[int, int, int, int]] = []
    contexts = [ROOT_CONTEXT_ID]
    entities: list[str] = []
    constants: dict[str, str] = {}
    active = ROOT_CONTEXT_ID
    last_relation = last_concept = -1

    position = 0
    while position < len(tokens):
        token = tokens[position]

        if token.kind == TokenKind.CONCEPT:
            entity_id = f"{ENTITY_PREFIX}{len(entities)}"
            nodes.append(Node(entity_id, NodeKind.ENTITY, token.surface, position))
            edges.append(
                Edge(active, entity_id, MEMBERSHIP_LABEL, EdgeKind.MEMBERSHIP, position)
            )
            entities.append(entity_id)
            last_concept = position
            position += 1

        elif token.kind == TokenKind.DISCOURSE_RELATION:
            source, hook, width = active, None, 1
            following = tokens[position + 1] if position + 1 < len(tokens) else None
            hooked = following is not None and following.kind == TokenKind.INDEX
            if hooked and following.offset < 0:
                rank = contexts.index(active) + following.offset
                if rank < 0:
                    raise _report(
                        IllFormedCategory.UNRESOLVABLE_INDEX,
                        f"context hook {following.surface} before the root context",
                        position + 1,
                    )
                source, hook, width = contexts[rank], following.offset, 2
            context_id = f"{CONTEXT_PREFIX}{len(contexts)}"
            nodes.append(Node(context_id, NodeKind.CONTEXT, CONTEXT_LABEL, position, hook))
            edges.append(
                Edge(source, context_id, token.surface, EdgeKind.DISCOURSE_RELATION, position)
            )
            contexts.append(context_id)
            active = context_id
            last_relation = position
            position += width

        elif token.kind in (TokenKind.ROLE, TokenKind.OPERATOR):
            if not entities:
                raise _report(
                    IllFormedCategory.DANGLING_ROLE,
                    f"{token.surface} appears before any concept",
                    position,
                )
            argument = tokens[position + 1] if position + 1 < len(tokens) else None
            if argument is None or not argument.is_argument:
                raise _report(
                    IllFormedCategory.DANGLING_ROLE,
                    f"{token.surface} has no following index or constant",
                    position,
                )
            kind = EdgeKind.ROLE if token.kind == TokenKind.ROLE else EdgeKind.OPERATOR
            source = entities[-1]
            if argument.kind == TokenKind.INDEX:
                rank = len(entities) + argument.offset
                if rank < 1:
                    raise _report(
                        IllFormedCategory.UNRESOLVABLE_INDEX,
                        f"{token.surface} {argument.surface} points before the first entity",
                        position + 1,
                    )
                pending.append((len(edges), len(entities), argument.offset, position + 1))
                edges.append(Edge(source, source, token.surface, kind, position))
            else:
                constant_id = _constant_node(argument, position + 1, nodes, constants)
                edges.append(Edge(source, constant_id, token.surface, kind, position))
            position += 2

        else:
            raise _report(
                IllFormedCategory.DANGLING_ROLE,
                f"argument {token.surface} without a role",
                position,
            )

    if not entities:
        raise _report(IllFormedCategory.EMPTY_GRAPH, "sequence has no concept", 0)

    for slot, source_rank, offset, index_position in pending:
        rank = source_rank + offset
        if rank > len(entities):
            raise _report(
                IllFormedCategory.UNRESOLVABLE_INDEX,
                f"index {offset:+d} points past the last entity",
                index_position,
            )
        edge = edges[slot]
        edges[slot] = Edge(edge.src, entities[rank - 1], edge.label, edge.kind, edge.position)

    if strict_scope and last_relation > last_concept:
        raise _report(
            IllFormedCategory.RELATION_WITHOUT_SCOPE,
            f"{tokens[last_relation].surface} opens a context with no entity",
            last_relation,
        )

    return Drg(tuple(nodes), tuple(edges), ROOT_CONTEXT_ID)


def _constant_node(
    token: Token, position: int, nodes: list[Node], constants: dict[str, str]
) -> str:
    """Return the node id for a constant, creating it on first use."""
    if token.surface not in constants:
        constant_id = f"{CONSTANT_PREFIX}{len(constants)}"
        constants[token.surface] = constant_id
        nodes.append(Node(constant_id, NodeKind.CONSTANT, token.surface, position))
    return constants[token.surface]


def linearize(g: Drg) -> TokenSequence:
    """Turn a graph produced by build_graph back into its sequence."""
    entity_rank = {}
    items: list[tuple[int, list[str]]] = []
    for node in g.nodes:
        if node.kind == NodeKind.CONSTANT or node.id == g.root:
            continue
        if node.position is None:
            raise GraphInvariantError(f"Node {node.id} lacks introduction order")
        if node.kind == NodeKind.ENTITY:
            entity_rank[node.id] = len(entity_rank)
            items.append((node.position, [node.label]))

    labels = {node.id: node.label for node in g.nodes}
    kinds = {node.id: node.kind for node in g.nodes}
    operators, relations = set(), set()
    for edge in g.edges:
        if edge.kind == EdgeKind.MEMBERSHIP:
            continue
        if edge.position is None:
            raise GraphInvariantError(f"Edge {edge} lacks introduction order")
        if edge.kind == EdgeKind.DISCOURSE_RELATION:
            relations.add(edge.label)
            hook = g.node(edge.dst).hook
            surfaces = [edge.label] if hook is None else [edge.label, f"{hook:+d}"]
        else:
            if edge.kind == EdgeKind.OPERATOR:
                operators.add(edge.label)
            if kinds[edge.dst] == NodeKind.ENTITY:
                argument = f"{entity_rank[edge.dst] - entity_rank[edge.src]:+d}"
            else:
                argument = labels[edge.dst]
            surfaces = [edge.label, argument]
        items.append((edge.position, surfaces))

    items.sort(key=lambda item: item[0])
    line = " ".join(surface for _, surfaces in items for surface in surfaces)
    return lex(line, SymbolInventory.from_lists(operators, relations))


def classify_lex_error(err: LexError) -> IllFormedReport:
    """Map a lexing failure to a best-effort ill-formed subtype."""
    if err.category == LexError.EMPTY_LINE:
        return IllFormedReport(IllFormedCategory.EMPTY_GRAPH, "empty line", 0)

    surface, fields, position = err.surface, err.fields, err.position
    following = fields[position + 1] if position + 1 < len(fields) else ""

    if surface.count('"') == 1:
        return IllFormedReport(
            IllFormedCategory.EXTRA_SPACE, f"quoted name split at {surface!r}", position
        )
    fused = FUSED_INDEX_RE.match(surface)
    if fused and is_concept(fused["rest"]):
        return IllFormedReport(
            IllFormedCategory.MISSING_SPACE,
            f"index {fused['index']} fused with {fused['rest']}",
            position,
        )
    if surface.endswith("_") or (following and is_concept(surface + following)):
        return IllFormedReport(
            IllFormedCategory.EXTRA_SPACE,
            f"concept split at {surface!r} {following!r}",
            position,
        )
    return IllFormedReport(
        IllFormedCategory.INVALID_TOKEN, f"invalid token {surface!r}", position
    )


def convert(
    line: str,
    inventory: SymbolInventory | None = None,
    strict_scope: bool = False,
) -> Drg | IllFormedReport:
    """Lex and build a line, returning the graph or why it failed."""
    try:
        return build_graph(lex(line, inventory), strict_scope=strict_scope)
    except LexError as err:
        return classify_lex_error(err)
    except IllFormedError as err:
        return err.report


def err_rate(results: Sequence[object]) -> float:
    """Return the percentage of results that are ill-formed reports."""
    if not results:
        raise EmptyInputError(ERROR_EMPTY_INPUT)
    ill_formed = sum(1 for result in results if isinstance(result, IllFormedReport))
    return 100.0 * ill_formed / len(results)


def count_ill_formed(results: Iterable[Drg | IllFormedReport]) -> int:
    """Return how many results are ill-formed."""
    return sum(1 for result in results if isinstance(result, IllFormedReport))
