"""Shared instances for the test suite."""

from __future__ import annotations

from pathlib import Path
from typing import Callable

import numpy as np
import pytest

from mmr_stp.graph import Edge, Instance, SteinerTree

FIXTURES = Path(__file__).resolve().parent / "fixtures"

RandomInstance = Callable[..., Instance]


def make_instance(
    node_count: int,
    edges: list[tuple[int, int, int, int]],
    terminals: set[int],
    *,
    root: int | None = None,
    name: str = "",
) -> Instance:
    return Instance(
        node_count=node_count,
        edges=tuple(Edge(*edge) for edge in edges),
        terminals=frozenset(terminals),
        root=min(terminals) if root is None else root,
        name=name,
    )


def random_instance(
    seed: int,
    *,
    nodes: int = 6,
    edges: int = 9,
    terminals: int = 3,
    max_cost: int = 20,
    degenerate: bool = False,
) -> Instance:
    """Connected random instance: a random spanning tree plus extra edges."""
    rng = np.random.Generator(np.random.PCG64(seed))
    pairs: list[tuple[int, int]] = []
    for node in range(2, nodes + 1):
        pairs.append((int(rng.integers(1, node)), node))
    remaining = [
        (a, b)
        for a in range(1, nodes + 1)
        for b in range(a + 1, nodes + 1)
        if (a, b) not in pairs
    ]
    extra = min(max(edges - len(pairs), 0), len(remaining))
    for index in rng.permutation(len(remaining))[:extra]:
        pairs.append(remaining[int(index)])
    edge_list = []
    for a, b in pairs:
        lower = int(rng.integers(0, max_cost, endpoint=True))
        upper = lower if degenerate else int(rng.integers(lower, max_cost, endpoint=True))
        edge_list.append((a, b, lower, upper))
    chosen = rng.choice(np.arange(1, nodes + 1), size=min(terminals, nodes), replace=False)
    return make_instance(nodes, edge_list, {int(node) for node in chosen}, name=f"rand{seed}")


@pytest.fixture
def tiny1() -> Instance:
    return make_instance(3, [(1, 2, 4, 8), (1, 3, 1, 3), (2, 3, 1, 3)], {1, 2}, name="TINY1")


@pytest.fixture
def tiny1_direct() -> SteinerTree:
    """TINY1's single edge 1-2."""
    return SteinerTree.of(0)


@pytest.fixture
def tiny1_path() -> SteinerTree:
    """TINY1's path 1-3-2, the min-max regret tree."""
    return SteinerTree.of(1, 2)


@pytest.fixture
def au_worse() -> Instance:
    return make_instance(
        3, [(1, 2, 0, 10), (1, 3, 4, 4), (3, 2, 4, 4)], {1, 2}, name="AU_WORSE"
    )


@pytest.fixture
def degenerate() -> Instance:
    return make_instance(
        5,
        [(1, 2, 3, 3), (2, 3, 2, 2), (3, 4, 4, 4), (1, 4, 8, 8), (2, 5, 1, 1), (5, 4, 2, 2)],
        {1, 3, 4},
        name="DET5",
    )


@pytest.fixture
def random_instances() -> RandomInstance:
    return random_instance


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES
