"""Exact min-max regret solver by constraint generation over adversary trees."""

from __future__ import annotations

import logging
import tempfile
import time
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Sequence

import numpy as np

from ._utils import gap_percent
from .codegen_lp import write_master_lp
from .graph import Instance, SteinerTree, reduce_to_tree, upper_cost
from .heuristics import algorithm_mean, algorithm_upper
from .milp import (
    MilpConfigurationError,
    MilpSolutionError,
    MilpTimeoutError,
    external_backend_run,
    selected_edges,
)
from .regret import RegretReport, robust_cost
from .stp import DreyfusWagnerOracle, StpOracle

logger = logging.getLogger(__name__)

DEFAULT_MAX_ITERATIONS = 1000
DEFAULT_TIME_LIMIT = 600.0
ENUMERATE_EDGE_CAP = 24
_DEADLINE_POLL = 512


class MasterBackend(str, Enum):
    """How the master problem is solved."""

    ENUMERATE = "enumerate"
    EXTERNAL_LP = "external-lp"


class MasterError(RuntimeError):
    """The master problem cannot be set up or solved."""


class SearchLimitReached(RuntimeError):
    """The deadline passed while the master problem was being solved."""


@dataclass(frozen=True)
class Cut:
    """Regret cut generated by an adversary tree.

    At candidate ``x`` the cut evaluates to the adversary's cost in the
    worst-case scenario of ``x``: ``sum(l_e + (u_e - l_e) * x_e)`` over its edges.
    """

    tree: SteinerTree

    def value(self, inst: Instance, x: SteinerTree) -> int:
        total = 0
        for edge_id in self.tree.edge_ids:
            edge = inst.edges[edge_id]
            total += edge.upper if edge_id in x.edge_ids else edge.lower
        return total


def master_objective(inst: Instance, cuts: Sequence[Cut], x: SteinerTree) -> int:
    """Return ``sum(u_e x_e) - min_cut value(x)``, the relaxed regret of *x*."""
    if not cuts:
        raise MasterError("master problem needs at least one cut")
    return upper_cost(inst, x) - min(cut.value(inst, x) for cut in cuts)


@dataclass(frozen=True)
class MasterSolution:
    tree: SteinerTree
    objective: int


def master_solve(
    inst: Instance,
    cuts: Sequence[Cut],
    backend: MasterBackend | str = MasterBackend.ENUMERATE,
    *,
    deadline: float | None = None,
    milp_command: str | None = None,
    edge_cap: int = ENUMERATE_EDGE_CAP,
    workdir: Path | None = None,
) -> MasterSolution:
    """Minimise the master objective over all Steiner trees for the given cuts.

    Raises :class:`SearchLimitReached` when *deadline* (a ``time.monotonic``
    value) passes before the search finishes.
    """
    if not cuts:
        raise MasterError("master problem needs at least one cut (it is unbounded otherwise)")
    backend = MasterBackend(backend)
    if backend is MasterBackend.ENUMERATE:
        if inst.edge_count > edge_cap:
            raise MasterError(
                f"enumeration backend is capped at {edge_cap} edges, "
                f"instance has {inst.edge_count}"
            )
        return _MasterSearch(inst, cuts, deadline).run()
    return _solve_external(inst, cuts, deadline, milp_command, workdir)


class _MasterSearch:
    """Depth-first branch and bound over the subtrees containing the root.

    The objective can only grow when an edge is added (by at least its lower
    cost), so a partial tree whose objective reaches the incumbent is cut off.
    """

    def __init__(self, inst: Instance, cuts: Sequence[Cut], deadline: float | None) -> None:
        self.inst = inst
        self.deadline = deadline
        lower = np.array([edge.lower for edge in inst.edges], dtype=np.int64)
        widths = np.array([edge.width for edge in inst.edges], dtype=np.int64)
        member = np.zeros((len(cuts), inst.edge_count), dtype=np.int64)
        for row, cut in enumerate(cuts):
            member[row, list(cut.tree.edge_ids)] = 1
        self.cut_base = member @ lower
        self.cut_delta = member * widths
        self.upper = [edge.upper for edge in inst.edges]
        self.best: int | None = None
        self.best_tree: SteinerTree | None = None
        self.nodes = 0

    def run(self) -> MasterSolution:
        inst = self.inst
        in_tree = {inst.root}
        chosen: list[int] = []
        covered = 1

        def objective(upper_total: int, cut_values: np.ndarray) -> int:
            return upper_total - int(cut_values.min())

        def search(
            candidates: list[int],
            upper_total: int,
            cut_values: np.ndarray,
        ) -> None:
            nonlocal covered
            self._tick()
            value = objective(upper_total, cut_values)
            if self.best is not None and value >= self.best:
                return
            if covered == len(inst.terminals):
                self.best = value
                self.best_tree = SteinerTree(frozenset(chosen))
                # extensions cannot improve on a feasible tree
                return
            pending = [
                e
                for e in candidates
                if not (inst.edges[e].a in in_tree and inst.edges[e].b in in_tree)
            ]
            if not pending:
                return
            edge_id, rest = pending[0], pending[1:]
            edge = inst.edges[edge_id]
            new_node = edge.b if edge.a in in_tree else edge.a
            in_tree.add(new_node)
            chosen.append(edge_id)
            is_terminal = new_node in inst.terminals
            covered += is_terminal
            frontier = [e for neighbor, e in inst.adjacency[new_node] if neighbor not in in_tree]
            search(
                rest + frontier,
                upper_total + self.upper[edge_id],
                cut_values + self.cut_delta[:, edge_id],
            )
            covered -= is_terminal
            chosen.pop()
            in_tree.remove(new_node)
            search(rest, upper_total, cut_values)

        root_edges = [edge_id for _, edge_id in inst.adjacency[inst.root]]
        search(root_edges, 0, self.cut_base.copy())
        if self.best is None or self.best_tree is None:  # pragma: no cover - connected instances
            raise MasterError("master search found no Steiner tree")
        logger.debug("Master search visited %d nodes, objective %d", self.nodes, self.best)
        return MasterSolution(self.best_tree, self.best)

    def _tick(self) -> None:
        self.nodes += 1
        if (
            self.deadline is not None
            and self.nodes % _DEADLINE_POLL == 0
            and time.monotonic() > self.deadline
        ):
            raise SearchLimitReached(f"master search stopped after {self.nodes} nodes")


def _solve_external(
    inst: Instance,
    cuts: Sequence[Cut],
    deadline: float | None,
    milp_command: str | None,
    workdir: Path | None,
) -> MasterSolution:
    if not milp_command:
        raise MilpConfigurationError(
            "external-lp backend needs a solver command (--milp-cmd or MMR_STP_MILP_CMD)"
        )
    timeout = None if deadline is None else max(deadline - time.monotonic(), 0.0)
    with tempfile.TemporaryDirectory(prefix="mmr-stp-", dir=workdir) as tmp:
        lp_path = Path(tmp) / "master.lp"
        write_master_lp(inst, [cut.tree for cut in cuts], lp_path)
        try:
            result = external_backend_run(lp_path, milp_command, timeout=timeout)
        except MilpTimeoutError as exc:
            raise SearchLimitReached(str(exc)) from exc
    edges = selected_edges(inst, result.values)
    try:
        tree = reduce_to_tree(inst, edges, tuple(edge.upper for edge in inst.edges))
    except ValueError as exc:
        raise MilpSolutionError(f"solver returned a non-tree edge set: {exc}") from exc
    objective = master_objective(inst, cuts, tree)
    if result.objective is not None and round(result.objective) != objective:
        logger.debug(
            "Solver objective %s differs from recomputed master objective %d",
            result.objective,
            objective,
        )
    return MasterSolution(tree, objective)


@dataclass(frozen=True)
class BendersLimits:
    max_iterations: int = DEFAULT_MAX_ITERATIONS
    time_limit: float = DEFAULT_TIME_LIMIT

    def __post_init__(self) -> None:
        if self.max_iterations <= 0:
            raise ValueError("max_iterations must be positive")
        if self.time_limit <= 0:
            raise ValueError("time_limit must be positive")


@dataclass(frozen=True)
class BendersIteration:
    """One line of the iteration log."""

    iteration: int
    lower_bound: int
    upper_bound: int
    pool_size: int
    master_seconds: float
    subproblem_seconds: float


@dataclass
class BendersState:
    """Cut pool, incumbent and bounds of a running constraint generation."""

    cut_pool: list[Cut]
    incumbent: tuple[SteinerTree, RegretReport]
    lower_bound: int = 0
    iteration: int = 0
    trace: list[BendersIteration] = field(default_factory=list)

    @property
    def upper_bound(self) -> int:
        return self.incumbent[1].robust_cost

    def add_cut(self, cut: Cut) -> bool:
        """Append *cut* unless its tree is already in the pool."""
        if any(existing.tree == cut.tree for existing in self.cut_pool):
            return False
        self.cut_pool.append(cut)
        return True

    def offer(self, tree: SteinerTree, report: RegretReport) -> bool:
        """Replace the incumbent if *report* is strictly better."""
        if report.robust_cost < self.upper_bound:
            self.incumbent = (tree, report)
            return True
        return False


@dataclass(frozen=True)
class BendersResult:
    tree: SteinerTree
    report: RegretReport
    state: BendersState
    optimal: bool
    elapsed: float = 0.0
    limit_reached: bool = False

    @property
    def lower_bound(self) -> int:
        return self.state.lower_bound

    @property
    def upper_bound(self) -> int:
        return self.report.robust_cost

    @property
    def iterations(self) -> int:
        return self.state.iteration

    @property
    def gap_pct(self) -> float:
        return gap_percent(self.lower_bound, self.upper_bound)


def benders_solve(
    inst: Instance,
    backend: MasterBackend | str = MasterBackend.ENUMERATE,
    limits: BendersLimits | None = None,
    *,
    oracle: StpOracle | None = None,
    milp_command: str | None = None,
    edge_cap: int = ENUMERATE_EDGE_CAP,
) -> BendersResult:
    """Solve the min-max regret STP by constraint generation.

    The pool starts with the AM and AU trees and the incumbent with the better
    of the two. Each round solves the master problem for a candidate and a
    lower bound, evaluates the candidate's robust cost, and adds the adversary
    tree as a new cut until the lower bound meets the incumbent.
    """
    limits = limits or BendersLimits()
    oracle = oracle or DreyfusWagnerOracle()
    backend = MasterBackend(backend)
    if not oracle.exact:
        logger.warning("Oracle '%s' is not exact; bounds are not certified", oracle.kind.value)
    start = time.monotonic()
    deadline = start + limits.time_limit

    mean = algorithm_mean(inst, oracle)
    upper = algorithm_upper(inst, oracle)
    incumbent = upper if upper[1].robust_cost < mean[1].robust_cost else mean
    state = BendersState(cut_pool=[], incumbent=incumbent)
    state.add_cut(Cut(mean[0]))
    state.add_cut(Cut(upper[0]))
    logger.debug("Initial pool has %d cut(s), UB = %d", len(state.cut_pool), state.upper_bound)

    optimal = False
    limit_reached = False
    while state.iteration < limits.max_iterations:
        if time.monotonic() >= deadline:
            logger.info("Time limit reached after %d iteration(s)", state.iteration)
            limit_reached = True
            break
        tick = time.monotonic()
        try:
            master = master_solve(
                inst,
                state.cut_pool,
                backend,
                deadline=deadline,
                milp_command=milp_command,
                edge_cap=edge_cap,
            )
        except SearchLimitReached as exc:
            logger.info("Time limit reached in master problem: %s", exc)
            limit_reached = True
            break
        master_seconds = time.monotonic() - tick
        state.iteration += 1
        state.lower_bound = max(state.lower_bound, master.objective)

        tick = time.monotonic()
        report = robust_cost(inst, master.tree, oracle)
        subproblem_seconds = time.monotonic() - tick
        state.offer(master.tree, report)
        state.trace.append(
            BendersIteration(
                iteration=state.iteration,
                lower_bound=master.objective,
                upper_bound=state.upper_bound,
                pool_size=len(state.cut_pool),
                master_seconds=master_seconds,
                subproblem_seconds=subproblem_seconds,
            )
        )
        logger.debug(
            "Iteration %d: LB = %d, UB = %d, cuts = %d",
            state.iteration,
            master.objective,
            state.upper_bound,
            len(state.cut_pool),
        )
        if master.objective >= state.upper_bound:
            # only an exact oracle certifies LB >= UB
            optimal = oracle.exact
            break
        if not state.add_cut(Cut(report.adversary_tree)):
            logger.warning("Adversary tree already in the cut pool; stopping without proof")
            break
    else:
        logger.info("Iteration limit %d reached", limits.max_iterations)
        limit_reached = True

    state.lower_bound = min(state.lower_bound, state.upper_bound)
    tree, report = state.incumbent
    elapsed = time.monotonic() - start
    logger.info(
        "Constraint generation finished: Z = %d, LB = %d, %d iteration(s), %s",
        report.robust_cost,
        state.lower_bound,
        state.iteration,
        "optimal" if optimal else "not proven optimal",
    )
    return BendersResult(tree, report, state, optimal, elapsed, limit_reached)
