"""Interval-cost graph instances, Steiner trees and their validation."""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import TYPE_CHECKING, Iterator

import networkx as nx
from networkx.utils import UnionFind

if TYPE_CHECKING:  # pragma: no cover
    from .scenario import Scenario

_TREE_SEPARATOR = re.compile(r"[,;\s]+")


class InstanceError(ValueError):
    """An in-memory instance violates a structural invariant."""

    def __init__(self, message: str, *, category: str = "instance") -> None:
        self.category = category
        super().__init__(message)


@dataclass(frozen=True)
class Edge:
    """Undirected edge with an integer cost interval ``[lower, upper]``."""

    a: int
    b: int
    lower: int
    upper: int

    @property
    def width(self) -> int:
        return self.upper - self.lower

    def other(self, node: int) -> int:
        """Return the endpoint opposite to *node*."""
        if node == self.a:
            return self.b
        if node == self.b:
            return self.a
        raise ValueError(f"node {node} is not an endpoint of edge {self.a}-{self.b}")


@dataclass(frozen=True)
class Instance:
    """Connected graph with interval edge costs, terminal set and root.

    Nodes are numbered ``1..node_count``; edges are addressed by their index in
    :attr:`edges`.
    """

    node_count: int
    edges: tuple[Edge, ...]
    terminals: frozenset[int]
    root: int
    name: str = ""
    comments: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self) -> None:
        if self.node_count <= 0:
            raise InstanceError("instance must have at least one node", category="nodes")
        seen: dict[frozenset[int], int] = {}
        for index, edge in enumerate(self.edges):
            for node in (edge.a, edge.b):
                if not 1 <= node <= self.node_count:
                    raise InstanceError(
                        f"edge {index} references node {node} outside 1..{self.node_count}",
                        category="reference",
                    )
            if edge.a == edge.b:
                raise InstanceError(
                    f"edge {index} is a self-loop at {edge.a}", category="reference"
                )
            key = frozenset((edge.a, edge.b))
            if key in seen:
                raise InstanceError(
                    f"edge {index} duplicates edge {seen[key]} ({edge.a}-{edge.b})",
                    category="reference",
                )
            seen[key] = index
            if edge.lower < 0:
                raise InstanceError(f"edge {index} has a negative lower cost", category="interval")
            if edge.lower > edge.upper:
                raise InstanceError(
                    f"edge {index} has lower cost {edge.lower} above upper cost {edge.upper}",
                    category="interval",
                )
        if not self.terminals:
            raise InstanceError("terminal set must not be empty", category="terminals")
        for terminal in self.terminals:
            if not 1 <= terminal <= self.node_count:
                raise InstanceError(
                    f"terminal {terminal} outside 1..{self.node_count}", category="terminals"
                )
        if self.root not in self.terminals:
            raise InstanceError(f"root {self.root} is not a terminal", category="terminals")
        if not nx.is_connected(self.to_networkx()):
            raise InstanceError("graph is not connected", category="connectivity")

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @property
    def is_degenerate(self) -> bool:
        """Whether every interval has zero width (a deterministic instance)."""
        return all(edge.lower == edge.upper for edge in self.edges)

    @cached_property
    def adjacency(self) -> dict[int, tuple[tuple[int, int], ...]]:
        """Map each node to its ``(neighbor, edge_id)`` pairs in edge-id order."""
        neighbors: dict[int, list[tuple[int, int]]] = {
            node: [] for node in range(1, self.node_count + 1)
        }
        for index, edge in enumerate(self.edges):
            neighbors[edge.a].append((edge.b, index))
            neighbors[edge.b].append((edge.a, index))
        return {node: tuple(pairs) for node, pairs in neighbors.items()}

    @cached_property
    def edge_lookup(self) -> dict[frozenset[int], int]:
        """Map an unordered endpoint pair to its edge id."""
        return {frozenset((edge.a, edge.b)): index for index, edge in enumerate(self.edges)}

    def to_networkx(self, weights: tuple[int, ...] | None = None) -> nx.Graph:
        """Return the undirected graph; edges carry ``id`` and optional ``weight``."""
        graph = nx.Graph()
        graph.add_nodes_from(range(1, self.node_count + 1))
        for index, edge in enumerate(self.edges):
            if weights is None:
                graph.add_edge(edge.a, edge.b, id=index)
            else:
                graph.add_edge(edge.a, edge.b, id=index, weight=weights[index])
        return graph


def with_root(inst: Instance, root: int) -> Instance:
    """Return a copy of *inst* rooted at another terminal."""
    if root not in inst.terminals:
        raise InstanceError(f"root {root} is not a terminal", category="terminals")
    return replace(inst, root=root)


@dataclass(frozen=True)
class SteinerTree:
    """Edge subset of an :class:`Instance`, meant to form a tree spanning the terminals."""

    edge_ids: frozenset[int]

    @classmethod
    def of(cls, *edge_ids: int) -> SteinerTree:
        return cls(frozenset(edge_ids))

    @property
    def key(self) -> tuple[int, ...]:
        """Sorted edge ids; the lexicographic tie-break key."""
        return tuple(sorted(self.edge_ids))

    def __len__(self) -> int:
        return len(self.edge_ids)

    def __contains__(self, edge_id: object) -> bool:
        return edge_id in self.edge_ids

    def nodes(self, inst: Instance) -> frozenset[int]:
        """Nodes touched by the selected edges (the root alone for an empty tree)."""
        if not self.edge_ids:
            return frozenset((inst.root,))
        touched: set[int] = set()
        for edge_id in self.edge_ids:
            edge = inst.edges[edge_id]
            touched.update((edge.a, edge.b))
        return frozenset(touched)


@dataclass(frozen=True)
class TreeCheck:
    """Outcome of :func:`validate_tree`; falsy results carry a reason."""

    valid: bool
    reason: str | None = None

    def __bool__(self) -> bool:
        return self.valid


def validate_tree(inst: Instance, tree: SteinerTree) -> TreeCheck:
    """Check that *tree* is acyclic, connected and covers every terminal."""
    edge_ids = tree.key
    for edge_id in edge_ids:
        if not 0 <= edge_id < inst.edge_count:
            return TreeCheck(False, f"edge id {edge_id} out of range")
    if not edge_ids:
        uncovered = sorted(inst.terminals - {inst.root})
        if uncovered:
            return TreeCheck(False, f"terminal {uncovered[0]} uncovered")
        return TreeCheck(True)

    components = UnionFind()
    touched: set[int] = set()
    for edge_id in edge_ids:
        edge = inst.edges[edge_id]
        if components[edge.a] == components[edge.b]:
            return TreeCheck(False, "cycle")
        components.union(edge.a, edge.b)
        touched.update((edge.a, edge.b))
    if len({components[node] for node in touched}) > 1:
        return TreeCheck(False, "disconnected")
    for terminal in sorted(inst.terminals):
        if terminal not in touched:
            return TreeCheck(False, f"terminal {terminal} uncovered")
    return TreeCheck(True)


def tree_cost(inst: Instance, tree: SteinerTree, scenario: Scenario) -> int:
    """Return ``F(x, S)`` in the scenario's integer scale."""
    scenario.check_dimension(inst)
    return sum(scenario.costs[edge_id] for edge_id in tree.edge_ids)


def upper_cost(inst: Instance, tree: SteinerTree) -> int:
    """Return the tree cost in the upper scenario, ``sum u_e x_e``."""
    return sum(inst.edges[edge_id].upper for edge_id in tree.edge_ids)


@dataclass(frozen=True)
class DirectedModel:
    """Bi-directed arcs of an instance; arcs ``2e`` and ``2e + 1`` come from edge ``e``."""

    arcs: tuple[tuple[int, int], ...]
    arc_to_edge: tuple[int, ...]

    def arcs_of(self, edge_id: int) -> tuple[int, int]:
        return 2 * edge_id, 2 * edge_id + 1


def bidirect(inst: Instance) -> DirectedModel:
    """Return both orientations of every edge."""
    arcs: list[tuple[int, int]] = []
    arc_to_edge: list[int] = []
    for index, edge in enumerate(inst.edges):
        arcs.extend(((edge.a, edge.b), (edge.b, edge.a)))
        arc_to_edge.extend((index, index))
    return DirectedModel(tuple(arcs), tuple(arc_to_edge))


def format_tree(inst: Instance, tree: SteinerTree) -> str:
    """Render *tree* as a node-pair certificate such as ``1-3,2-3``."""
    return ",".join(f"{inst.edges[e].a}-{inst.edges[e].b}" for e in tree.key)


def parse_tree(inst: Instance, text: str) -> SteinerTree:
    """Parse a node-pair certificate (``1-3,2-3``) into a tree of *inst*."""
    edge_ids: set[int] = set()
    for token in _TREE_SEPARATOR.split(text.strip()):
        if not token:
            continue
        parts = token.split("-")
        if len(parts) != 2 or not all(part.isdigit() for part in parts):
            raise ValueError(f"tree edge '{token}' must be written as 'i-j'")
        key = frozenset(int(part) for part in parts)
        edge_id = inst.edge_lookup.get(key)
        if edge_id is None:
            raise ValueError(f"tree edge '{token}' is not an edge of the instance")
        if edge_id in edge_ids:
            raise ValueError(f"tree edge '{token}' is listed twice")
        edge_ids.add(edge_id)
    return SteinerTree(frozenset(edge_ids))


def leaves_are_terminals(inst: Instance, tree: SteinerTree) -> bool:
    """Whether every degree-one node of *tree* is a terminal."""
    degree: dict[int, int] = {}
    for edge_id in tree.edge_ids:
        edge = inst.edges[edge_id]
        degree[edge.a] = degree.get(edge.a, 0) + 1
        degree[edge.b] = degree.get(edge.b, 0) + 1
    return all(node in inst.terminals for node, count in degree.items() if count == 1)


def iter_subtrees(inst: Instance) -> Iterator[SteinerTree]:
    """Yield every tree that contains the root, each exactly once.

    Include/exclude branching on the first frontier edge; the empty tree (the
    root alone) is yielded too.
    """
    adjacency = inst.adjacency
    in_tree = {inst.root}
    chosen: list[int] = []

    def grow(candidates: list[int]) -> Iterator[SteinerTree]:
        pending = [
            edge_id
            for edge_id in candidates
            if not (inst.edges[edge_id].a in in_tree and inst.edges[edge_id].b in in_tree)
        ]
        if not pending:
            yield SteinerTree(frozenset(chosen))
            return
        edge_id, rest = pending[0], pending[1:]
        edge = inst.edges[edge_id]
        new_node = edge.b if edge.a in in_tree else edge.a
        in_tree.add(new_node)
        chosen.append(edge_id)
        frontier = [e for neighbor, e in adjacency[new_node] if neighbor not in in_tree]
        yield from grow(rest + frontier)
        chosen.pop()
        in_tree.remove(new_node)
        yield from grow(rest)

    yield from grow([edge_id for _, edge_id in adjacency[inst.root]])


def iter_steiner_trees(inst: Instance, *, leaves_terminal: bool = False) -> Iterator[SteinerTree]:
    """Yield every Steiner tree of *inst* (optionally only those with terminal leaves)."""
    for tree in iter_subtrees(inst):
        if not inst.terminals <= tree.nodes(inst):
            continue
        if leaves_terminal and not leaves_are_terminals(inst, tree):
            continue
        yield tree


def reduce_to_tree(
    inst: Instance,
    edge_ids: frozenset[int] | set[int],
    weights: tuple[int, ...],
) -> SteinerTree:
    """Reduce a connected edge set to a Steiner tree of no larger weight.

    Keeps a minimum spanning forest (ties by edge id) and then strips
    non-terminal leaves until none remain.
    """
    components = UnionFind()
    kept: set[int] = set()
    for edge_id in sorted(edge_ids, key=lambda e: (weights[e], e)):
        edge = inst.edges[edge_id]
        if components[edge.a] != components[edge.b]:
            components.union(edge.a, edge.b)
            kept.add(edge_id)

    incident: dict[int, set[int]] = {}
    for edge_id in kept:
        edge = inst.edges[edge_id]
        incident.setdefault(edge.a, set()).add(edge_id)
        incident.setdefault(edge.b, set()).add(edge_id)
    leaves = [node for node, edges in incident.items() if len(edges) == 1]
    while leaves:
        node = leaves.pop()
        if node in inst.terminals or len(incident.get(node, ())) != 1:
            continue
        (edge_id,) = incident.pop(node)
        kept.discard(edge_id)
        other = inst.edges[edge_id].other(node)
        incident[other].discard(edge_id)
        if not incident[other]:
            del incident[other]
        elif len(incident[other]) == 1:
            leaves.append(other)

    tree = SteinerTree(frozenset(kept))
    check = validate_tree(inst, tree)
    if not check:
        raise ValueError(f"edge set does not contain a Steiner tree: {check.reason}")
    return tree
