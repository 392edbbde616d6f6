"""Penman serialization of DRGs and triple extraction for Smatch."""
from __future__ import annotations

import logging
from collections.abc import Iterable, Iterator
from dataclasses import dataclass, field
from pathlib import Path

import penman
from penman.layout import interpret
from penman.tree import Tree

from .const import MEMBERSHIP_LABEL
from .graph import Drg, EdgeKind, NodeKind

_LOGGER = logging.getLogger(__name__)

INSTANCE_ROLE = ":instance"

Triple = tuple[str, str, str]


@dataclass(frozen=True)
class PenmanGraph:
    """A rooted Penman tree of a DRG."""

    tree: Tree
    metadata: dict[str, str] = field(default_factory=dict, compare=False)

    @property
    def top(self) -> str:
        """Return the root variable."""
        return self.tree.node[0]

    def to_text(self, one_line: bool = True) -> str:
        """Return the Penman string."""
        return penman.format(self.tree, indent=None if one_line else -1)

    @classmethod
    def from_text(cls, text: str) -> PenmanGraph:
        """Parse a Penman string."""
        tree = penman.parse(text)
        return cls(tree, dict(tree.metadata))


@dataclass(frozen=True)
class TripleSet:
    """Instance, relation and attribute triples of one graph."""

    instances: tuple[Triple, ...]
    relations: tuple[Triple, ...]
    attributes: tuple[Triple, ...]
    top: str | None = None

    def __len__(self) -> int:
        return len(self.instances) + len(self.relations) + len(self.attributes)

    @property
    def variables(self) -> tuple[str, ...]:
        """Return variables in instance order."""
        return tuple(var for var, _, _ in self.instances)

    @property
    def triples(self) -> tuple[Triple, ...]:
        """Return all triples."""
        return self.instances + self.relations + self.attributes

    def instance_of(self, var: str) -> str | None:
        """Return the instance label of a variable."""
        for source, _, label in self.instances:
            if source == var:
                return label
        return None


def _role(label: str) -> str:
    return f":{label}"


def to_penman(g: Drg) -> PenmanGraph:
    """Serialize a DRG as a Penman tree rooted at its root context."""
    labels = {node.id: node.label for node in g.nodes}
    kinds = {node.id: node.kind for node in g.nodes}
    visited: set[str] = set()

    def _branches(node_id: str) -> tuple[str, list]:
        visited.add(node_id)
        branches: list[tuple[str, object]] = [("/", labels[node_id])]
        for edge in g.outgoing(node_id):
            role = _role(MEMBERSHIP_LABEL if edge.kind == EdgeKind.MEMBERSHIP else edge.label)
            if kinds[edge.dst] == NodeKind.CONSTANT:
                branches.append((role, labels[edge.dst]))
            elif edge.dst in visited:
                branches.append((role, edge.dst))
            else:
                branches.append((role, _branches(edge.dst)))
        return node_id, branches

    return PenmanGraph(Tree(_branches(g.root)))


def extract_triples(p: PenmanGraph) -> TripleSet:
    """Return the canonical triples of a Penman graph."""
    graph = interpret(p.tree)
    return TripleSet(
        instances=tuple((t.source, INSTANCE_ROLE, t.target) for t in graph.instances()),
        relations=tuple(tuple(t) for t in graph.edges()),
        attributes=tuple(tuple(t) for t in graph.attributes()),
        top=graph.top,
    )


def drg_triples(g: Drg) -> TripleSet:
    """Return the triples of a DRG."""
    return extract_triples(to_penman(g))


def write_penman(
    graphs: Iterable[tuple[str, PenmanGraph]], path: Path, one_line: bool = False
) -> int:
    """Write graphs as blank-line separated blocks, or one per line."""
    count = 0
    with open(path, "w", encoding="utf-8") as file:
        for graph_id, graph in graphs:
            if one_line:
                file.write(graph.to_text(one_line=True) + "\n")
            else:
                file.write(f"# ::id {graph_id}\n{graph.to_text(one_line=False)}\n\n")
            count += 1
    _LOGGER.debug("Wrote %d Penman graphs to %s", count, path)
    return count


def read_penman(path: Path) -> Iterator[PenmanGraph]:
    """Read Penman graphs from a file in either layout."""
    with open(path, encoding="utf-8") as file:
        for tree in penman.iterparse(file):
            yield PenmanGraph(tree, dict(tree.metadata))
