"""Scenario heuristics: solve one deterministic STP, then measure its regret."""

from __future__ import annotations

import logging
from enum import Enum

from .graph import Instance, SteinerTree
from .regret import RegretReport, robust_cost
from .scenario import Scenario, midpoint_scenario, upper_scenario
from .stp import StpOracle

logger = logging.getLogger(__name__)


class HeuristicKind(str, Enum):
    """Selectable scenario heuristic."""

    MEAN = "am"
    UPPER = "au"
    MEAN_UPPER = "amu"


def _solve_in(
    inst: Instance,
    scenario: Scenario,
    oracle: StpOracle,
    label: str,
) -> tuple[SteinerTree, RegretReport]:
    solution = oracle.solve(inst, scenario)
    report = robust_cost(inst, solution.tree, oracle)
    logger.debug("%s tree has %d edges, Z = %d", label, len(solution.tree), report.robust_cost)
    return solution.tree, report


def algorithm_mean(inst: Instance, oracle: StpOracle) -> tuple[SteinerTree, RegretReport]:
    """Solve the STP at the midpoint scenario and evaluate its robust cost.

    With an exact oracle the returned robust cost is at most twice the
    min-max regret optimum.
    """
    return _solve_in(inst, midpoint_scenario(inst), oracle, "AM")


def algorithm_upper(inst: Instance, oracle: StpOracle) -> tuple[SteinerTree, RegretReport]:
    """Solve the STP at the upper scenario and evaluate its robust cost."""
    return _solve_in(inst, upper_scenario(inst), oracle, "AU")


def algorithm_mean_upper(
    inst: Instance,
    oracle: StpOracle,
) -> tuple[SteinerTree, RegretReport]:
    """Run AM and AU and keep the tree of smaller robust cost (AM on ties)."""
    mean = algorithm_mean(inst, oracle)
    upper = algorithm_upper(inst, oracle)
    if upper[1].robust_cost < mean[1].robust_cost:
        return upper
    return mean


def run_heuristic(
    kind: HeuristicKind | str,
    inst: Instance,
    oracle: StpOracle,
) -> tuple[SteinerTree, RegretReport]:
    """Dispatch to the heuristic selected by *kind*."""
    kind = HeuristicKind(kind)
    if kind is HeuristicKind.MEAN:
        return algorithm_mean(inst, oracle)
    if kind is HeuristicKind.UPPER:
        return algorithm_upper(inst, oracle)
    return algorithm_mean_upper(inst, oracle)
