"""Maximum-regret evaluation and the brute-force min-max regret oracle."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any

import numpy as np

from .graph import Instance, SteinerTree, format_tree, iter_steiner_trees, tree_cost
from .scenario import Scenario, extreme_scenarios, worst_case_scenario
from .stp import OracleLimitError, StpOracle

logger = logging.getLogger(__name__)

MINMAX_BRUTEFORCE_EDGE_CAP = 14
EXTREME_REGRET_EDGE_CAP = 16


@dataclass(frozen=True)
class RegretReport:
    """Robust cost ``Z(x) = F(x, S^x) - F(z^{S^x}, S^x)`` with its certificate."""

    tree_cost_worst: int
    adversary_cost: int
    robust_cost: int
    worst_scenario: Scenario
    adversary_tree: SteinerTree
    exact: bool = True

    def __post_init__(self) -> None:
        if self.robust_cost != self.tree_cost_worst - self.adversary_cost:
            raise ValueError("robust cost must equal worst-case cost minus adversary cost")
        if self.robust_cost < 0:
            raise ValueError("robust cost must be nonnegative")

    def to_dict(self, inst: Instance) -> dict[str, Any]:
        return {
            "robust_cost": self.robust_cost,
            "tree_cost_worst": self.tree_cost_worst,
            "adversary_cost": self.adversary_cost,
            "adversary_tree": format_tree(inst, self.adversary_tree),
            "worst_scenario": self.worst_scenario.as_list(),
            "exact": self.exact,
        }


def robust_cost(inst: Instance, tree: SteinerTree, oracle: StpOracle) -> RegretReport:
    """Evaluate the maximum regret of *tree* with a single STP solve in ``S^x``."""
    worst = worst_case_scenario(inst, tree)
    worst_cost = tree_cost(inst, tree, worst)
    adversary = oracle.solve(inst, worst)
    adversary_tree, adversary_cost = adversary.tree, adversary.cost
    if not oracle.exact:
        logger.debug("Robust cost evaluated with inexact oracle '%s'", oracle.kind.value)
        if adversary_cost > worst_cost:
            adversary_tree, adversary_cost = tree, worst_cost
    return RegretReport(
        tree_cost_worst=worst_cost,
        adversary_cost=adversary_cost,
        robust_cost=worst_cost - adversary_cost,
        worst_scenario=worst,
        adversary_tree=adversary_tree,
        exact=oracle.exact,
    )


def regret_in_scenario(
    inst: Instance,
    tree: SteinerTree,
    scenario: Scenario,
    oracle: StpOracle,
) -> int:
    """Return ``F(x, S) - F(z^S, S)`` in the scenario's scale."""
    return tree_cost(inst, tree, scenario) - oracle.solve(inst, scenario).cost


def _incidence(inst: Instance, trees: list[SteinerTree]) -> np.ndarray:
    matrix = np.zeros((len(trees), inst.edge_count), dtype=np.int64)
    for row, tree in enumerate(trees):
        matrix[row, list(tree.edge_ids)] = 1
    return matrix


def minmax_regret_bruteforce(
    inst: Instance,
    *,
    edge_cap: int = MINMAX_BRUTEFORCE_EDGE_CAP,
) -> tuple[SteinerTree, RegretReport]:
    """Return a Steiner tree of minimum robust cost by exhaustive enumeration.

    Candidates and adversaries range over the trees whose leaves are all
    terminals, listed in key order; adding a Steiner leaf never lowers ``Z``, so
    the optimum value is that of the full tree set. No STP oracle is involved.
    """
    if inst.edge_count > edge_cap:
        raise OracleLimitError(
            f"brute-force min-max regret is capped at {edge_cap} edges, "
            f"instance has {inst.edge_count}"
        )
    trees = sorted(iter_steiner_trees(inst, leaves_terminal=True), key=lambda t: t.key)
    incidence = _incidence(inst, trees)
    lower = np.array([edge.lower for edge in inst.edges], dtype=np.int64)
    upper = np.array([edge.upper for edge in inst.edges], dtype=np.int64)
    # cut[i, j]: cost of adversary j in the worst-case scenario of candidate i
    cut = (incidence * (upper - lower)) @ incidence.T + (incidence @ lower)[np.newaxis, :]
    worst_costs = incidence @ upper
    adversaries = np.argmin(cut, axis=1)
    regrets = worst_costs - cut[np.arange(len(trees)), adversaries]
    best = int(np.argmin(regrets))
    tree = trees[best]
    adversary = trees[int(adversaries[best])]
    report = RegretReport(
        tree_cost_worst=int(worst_costs[best]),
        adversary_cost=int(cut[best, adversaries[best]]),
        robust_cost=int(regrets[best]),
        worst_scenario=worst_case_scenario(inst, tree),
        adversary_tree=adversary,
    )
    logger.debug(
        "Brute-force min-max regret over %d trees: Z* = %d", len(trees), report.robust_cost
    )
    return tree, report


def extreme_regret_bruteforce(
    inst: Instance,
    tree: SteinerTree,
    *,
    edge_cap: int = EXTREME_REGRET_EDGE_CAP,
) -> int:
    """Return ``max_S F(x, S) - F(z^S, S)`` over every extreme scenario ``S``."""
    if inst.edge_count > edge_cap:
        raise OracleLimitError(
            f"extreme-scenario regret is capped at {edge_cap} edges, "
            f"instance has {inst.edge_count}"
        )
    trees = list(iter_steiner_trees(inst, leaves_terminal=True))
    incidence = _incidence(inst, trees)
    costs = [s.costs for s in extreme_scenarios(inst)]
    scenarios = np.array(costs, dtype=np.int64).reshape(len(costs), inst.edge_count)
    optimum = (incidence @ scenarios.T).min(axis=0)
    selected = np.zeros(inst.edge_count, dtype=np.int64)
    selected[list(tree.edge_ids)] = 1
    return int((scenarios @ selected - optimum).max())
