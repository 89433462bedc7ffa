"""Deterministic Steiner tree oracles used as subroutines."""

from __future__ import annotations

import heapq
import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np
from networkx.algorithms.approximation import steiner_tree

from .graph import Instance, SteinerTree, iter_steiner_trees, reduce_to_tree
from .scenario import Scenario

logger = logging.getLogger(__name__)

DEFAULT_TERMINAL_CAP = 16
BRUTEFORCE_EDGE_CAP = 16
_INFINITY = 2**61


class OracleKind(str, Enum):
    """Selectable STP oracle."""

    DW = "dw"
    BRUTE = "brute"
    SP = "sp"


class OracleLimitError(ValueError):
    """The instance exceeds the size cap of the requested oracle."""


@dataclass(frozen=True)
class StpSolution:
    """A Steiner tree with its cost in the queried scenario's scale."""

    tree: SteinerTree
    cost: int
    optimal: bool
    scale: int = 1


def solve_exact_dw(
    inst: Instance,
    scenario: Scenario,
    *,
    terminal_cap: int = DEFAULT_TERMINAL_CAP,
) -> StpSolution:
    """Solve the STP exactly by Dreyfus-Wagner dynamic programming.

    ``cost[S][v]`` is the cheapest tree joining the non-root terminals in
    ``S`` with node ``v``; each subset is first merged over its splits at a
    common node, then relaxed along edges with Dijkstra. The answer is
    ``cost[all][root]``.
    """
    scenario.check_dimension(inst)
    if len(inst.terminals) > terminal_cap:
        raise OracleLimitError(
            f"Dreyfus-Wagner is capped at {terminal_cap} terminals, "
            f"instance has {len(inst.terminals)}"
        )
    others = sorted(inst.terminals - {inst.root})
    if not others:
        return StpSolution(SteinerTree(frozenset()), 0, True, scenario.scale)

    weights = scenario.costs
    size = inst.node_count + 1
    full = (1 << len(others)) - 1
    cost = np.full((full + 1, size), _INFINITY, dtype=np.int64)
    via_split = np.zeros((full + 1, size), dtype=np.int64)
    via_edge = np.full((full + 1, size), -1, dtype=np.int64)
    columns = np.arange(size)

    for mask in range(1, full + 1):
        merged = np.full(size, _INFINITY, dtype=np.int64)
        split = np.zeros(size, dtype=np.int64)
        if mask & (mask - 1) == 0:
            merged[others[mask.bit_length() - 1]] = 0
        else:
            subs = _split_masks(mask)
            candidates = cost[subs] + cost[mask ^ subs]
            pick = candidates.argmin(axis=0)
            merged = np.minimum(candidates[pick, columns], _INFINITY)
            split = subs[pick]
        dist, pred = _relax(inst, merged.tolist(), weights)
        cost[mask] = dist
        via_edge[mask] = pred
        via_split[mask] = np.where(np.asarray(pred) < 0, split, 0)

    best = int(cost[full][inst.root])
    used: set[int] = set()
    stack = [(full, inst.root)]
    while stack:
        mask, node = stack.pop()
        edge_id = int(via_edge[mask][node])
        if edge_id >= 0:
            used.add(edge_id)
            stack.append((mask, inst.edges[edge_id].other(node)))
            continue
        sub = int(via_split[mask][node])
        if sub:
            stack.extend(((sub, node), (mask ^ sub, node)))
    tree = reduce_to_tree(inst, used, weights)
    tree_weight = sum(weights[e] for e in tree.edge_ids)
    if tree_weight != best:  # pragma: no cover - guards the backtrace
        raise RuntimeError(f"Dreyfus-Wagner backtrace cost {tree_weight} != optimum {best}")
    return StpSolution(tree, best, True, scenario.scale)


def _split_masks(mask: int) -> np.ndarray:
    """Proper submasks of *mask* that keep its lowest bit, in increasing order."""
    bits = [1 << i for i in range(mask.bit_length()) if mask >> i & 1]
    index = np.arange(1 << (len(bits) - 1), dtype=np.int64)
    subs = np.full(index.shape, bits[0], dtype=np.int64)
    for shift, bit in enumerate(bits[1:]):
        subs |= ((index >> shift) & 1) * bit
    return subs[:-1]


def _relax(
    inst: Instance,
    start: list[int],
    weights: tuple[int, ...],
) -> tuple[list[int], list[int]]:
    dist = list(start)
    pred = [-1] * len(dist)
    heap = [(value, node) for node, value in enumerate(dist) if value < _INFINITY]
    heapq.heapify(heap)
    done = [False] * len(dist)
    adjacency = inst.adjacency
    while heap:
        value, node = heapq.heappop(heap)
        if done[node]:
            continue
        done[node] = True
        for neighbor, edge_id in adjacency[node]:
            candidate = value + weights[edge_id]
            if candidate < dist[neighbor]:
                dist[neighbor] = candidate
                pred[neighbor] = edge_id
                heapq.heappush(heap, (candidate, neighbor))
    return dist, pred


def solve_bruteforce(
    inst: Instance,
    scenario: Scenario,
    *,
    edge_cap: int = BRUTEFORCE_EDGE_CAP,
) -> StpSolution:
    """Solve the STP by listing every Steiner tree (cheapest, then smallest key)."""
    scenario.check_dimension(inst)
    if inst.edge_count > edge_cap:
        raise OracleLimitError(
            f"brute-force STP is capped at {edge_cap} edges, instance has {inst.edge_count}"
        )
    weights = scenario.costs
    best: tuple[int, tuple[int, ...]] | None = None
    best_tree: SteinerTree | None = None
    for tree in iter_steiner_trees(inst):
        rank = (sum(weights[e] for e in tree.edge_ids), tree.key)
        if best is None or rank < best:
            best, best_tree = rank, tree
    if best is None or best_tree is None:  # pragma: no cover - connected instances have trees
        raise RuntimeError("instance has no Steiner tree")
    return StpSolution(best_tree, best[0], True, scenario.scale)


def solve_heuristic_sp(inst: Instance, scenario: Scenario) -> StpSolution:
    """Distance-network heuristic (Kou, Markowsky and Berman) via networkx."""
    scenario.check_dimension(inst)
    weights = scenario.costs
    if len(inst.terminals) == 1:
        return StpSolution(SteinerTree(frozenset()), 0, False, scenario.scale)
    graph = inst.to_networkx(weights)
    approx = steiner_tree(graph, sorted(inst.terminals), weight="weight", method="kou")
    used = {int(edge_id) for _, _, edge_id in approx.edges(data="id")}
    tree = reduce_to_tree(inst, used, weights)
    return StpSolution(tree, sum(weights[e] for e in tree.edge_ids), False, scenario.scale)


class StpOracle:
    """Callable STP solver with a call counter."""

    kind: OracleKind
    exact: bool

    def __init__(self) -> None:
        self.calls = 0

    def solve(self, inst: Instance, scenario: Scenario) -> StpSolution:
        self.calls += 1
        return self._solve(inst, scenario)

    def _solve(self, inst: Instance, scenario: Scenario) -> StpSolution:  # pragma: no cover
        raise NotImplementedError


class DreyfusWagnerOracle(StpOracle):
    kind = OracleKind.DW
    exact = True

    def __init__(self, *, terminal_cap: int = DEFAULT_TERMINAL_CAP) -> None:
        super().__init__()
        self.terminal_cap = terminal_cap

    def _solve(self, inst: Instance, scenario: Scenario) -> StpSolution:
        return solve_exact_dw(inst, scenario, terminal_cap=self.terminal_cap)


class BruteForceOracle(StpOracle):
    kind = OracleKind.BRUTE
    exact = True

    def _solve(self, inst: Instance, scenario: Scenario) -> StpSolution:
        return solve_bruteforce(inst, scenario)


class ShortestPathOracle(StpOracle):
    kind = OracleKind.SP
    exact = False

    def _solve(self, inst: Instance, scenario: Scenario) -> StpSolution:
        return solve_heuristic_sp(inst, scenario)


def make_oracle(
    kind: OracleKind | str,
    *,
    terminal_cap: int = DEFAULT_TERMINAL_CAP,
) -> StpOracle:
    """Instantiate the oracle selected by *kind*."""
    kind = OracleKind(kind)
    logger.debug("Using STP oracle '%s'", kind.value)
    if kind is OracleKind.DW:
        return DreyfusWagnerOracle(terminal_cap=terminal_cap)
    if kind is OracleKind.BRUTE:
        return BruteForceOracle()
    return ShortestPathOracle()
