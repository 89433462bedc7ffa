"""Edge-cost scenarios: lower, upper, midpoint and per-tree worst case."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

from .graph import Instance, SteinerTree, validate_tree

MIDPOINT_SCALE = 2
EXTREME_SCENARIO_EDGE_CAP = 20


class ScenarioError(ValueError):
    """A scenario does not fit the instance or tree it is used with."""


@dataclass(frozen=True)
class Scenario:
    """One integer cost per edge; the true cost of edge ``e`` is ``costs[e] / scale``."""

    costs: tuple[int, ...]
    scale: int = 1

    def __post_init__(self) -> None:
        if self.scale not in (1, MIDPOINT_SCALE):
            raise ScenarioError(f"scenario scale must be 1 or 2, got {self.scale}")
        if any(cost < 0 for cost in self.costs):
            raise ScenarioError("scenario costs must be nonnegative")

    def check_dimension(self, inst: Instance) -> None:
        """Raise unless the scenario has one cost per edge of *inst*."""
        if len(self.costs) != inst.edge_count:
            raise ScenarioError(
                f"scenario has {len(self.costs)} costs but instance has {inst.edge_count} edges"
            )

    def true_cost(self, edge_id: int) -> Fraction:
        return Fraction(self.costs[edge_id], self.scale)

    def rescaled(self, scale: int) -> Scenario:
        """Express the same costs over the denominator *scale*."""
        if scale % self.scale:
            raise ScenarioError(f"cannot rescale from {self.scale} to {scale}")
        factor = scale // self.scale
        return Scenario(tuple(cost * factor for cost in self.costs), scale)

    def within_box(self, inst: Instance) -> bool:
        """Whether ``l_e <= c_e <= u_e`` holds for every edge after descaling."""
        self.check_dimension(inst)
        return all(
            edge.lower * self.scale <= cost <= edge.upper * self.scale
            for edge, cost in zip(inst.edges, self.costs)
        )

    def is_extreme(self, inst: Instance) -> bool:
        """Whether every cost sits on an interval endpoint."""
        self.check_dimension(inst)
        return all(
            cost in (edge.lower * self.scale, edge.upper * self.scale)
            for edge, cost in zip(inst.edges, self.costs)
        )

    def as_list(self) -> list[float | int]:
        """Descaled costs for JSON output (integers when exact)."""
        if self.scale == 1:
            return list(self.costs)
        return [cost // 2 if cost % 2 == 0 else cost / 2 for cost in self.costs]


def lower_scenario(inst: Instance) -> Scenario:
    return Scenario(tuple(edge.lower for edge in inst.edges))


def upper_scenario(inst: Instance) -> Scenario:
    return Scenario(tuple(edge.upper for edge in inst.edges))


def midpoint_scenario(inst: Instance) -> Scenario:
    """Return ``(l + u) / 2`` per edge, stored exactly as ``l + u`` over scale 2."""
    return Scenario(tuple(edge.lower + edge.upper for edge in inst.edges), MIDPOINT_SCALE)


def worst_case_scenario(inst: Instance, tree: SteinerTree) -> Scenario:
    """Upper costs on the edges of *tree*, lower costs elsewhere."""
    check = validate_tree(inst, tree)
    if not check:
        raise ScenarioError(f"tree is not a Steiner tree of the instance: {check.reason}")
    return Scenario(
        tuple(
            edge.upper if index in tree.edge_ids else edge.lower
            for index, edge in enumerate(inst.edges)
        )
    )


def extreme_scenarios(inst: Instance) -> Iterator[Scenario]:
    """Yield all ``2^|E|`` endpoint scenarios, edges with zero width counted once."""
    if inst.edge_count > EXTREME_SCENARIO_EDGE_CAP:
        raise ScenarioError(
            f"extreme scenario enumeration is capped at {EXTREME_SCENARIO_EDGE_CAP} edges"
        )
    choices = [
        (edge.lower,) if edge.lower == edge.upper else (edge.lower, edge.upper)
        for edge in inst.edges
    ]
    for costs in itertools.product(*choices):
        yield Scenario(tuple(costs))
