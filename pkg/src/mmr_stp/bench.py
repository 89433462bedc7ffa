"""Single-method solve records and the benchmark harness writing CSV reports."""

from __future__ import annotations

import csv
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace
from datetime import datetime, timezone
from pathlib import Path
from statistics import mean
from typing import Any, Iterable, Sequence, TextIO

from ._utils import deviation_percent
from .benders import BendersLimits, MasterBackend, benders_solve
from .graph import Instance, SteinerTree, format_tree
from .heuristics import HeuristicKind, run_heuristic
from .regret import RegretReport, minmax_regret_bruteforce
from .steinlib import read_steinlib
from .stp import make_oracle

logger = logging.getLogger(__name__)

METHODS = ("benders", "am", "au", "amu", "brute")
HEURISTICS = ("am", "au", "amu")
CSV_COLUMNS = ("instance", "method", "Z", "LB", "gap_pct", "dev_pct", "time_s", "iters", "optimal")
AVERAGE_NAME = "AVG"


@dataclass(frozen=True)
class SolveOptions:
    """Knobs shared by every solve method."""

    oracle: str = "dw"
    backend: str = "enumerate"
    time_limit: float = 600.0
    max_iterations: int = 1000
    milp_cmd: str | None = None
    dw_terminal_cap: int = 16
    enumerate_edge_cap: int = 24


@dataclass(frozen=True)
class BenchRecord:
    """One report row; ``None`` fields are left blank in the CSV."""

    instance_name: str
    method: str
    robust_cost: float | None = None
    lower_bound: float | None = None
    gap_pct: float | None = None
    dev_pct: float | None = None
    wall_time_seconds: float | None = None
    iterations: float | None = None
    optimal: bool | None = None
    tree: str | None = None
    error: str | None = None

    def __post_init__(self) -> None:
        if self.gap_pct is not None and self.gap_pct < 0:
            raise ValueError("gap_pct must be nonnegative")
        if self.dev_pct is not None and self.dev_pct < -100:
            raise ValueError("dev_pct must not be below -100")
        if self.optimal and self.gap_pct not in (None, 0.0):
            raise ValueError("an optimal record must have a zero gap")

    def to_dict(self) -> dict[str, Any]:
        return {key: value for key, value in asdict(self).items() if value is not None}

    def csv_row(self) -> list[str]:
        return [
            self.instance_name,
            self.method,
            _number(self.robust_cost),
            _number(self.lower_bound),
            _number(self.gap_pct),
            _number(self.dev_pct),
            "" if self.wall_time_seconds is None else f"{self.wall_time_seconds:.3f}",
            _number(self.iterations),
            "" if self.optimal is None else str(self.optimal).lower(),
        ]


def _number(value: float | None) -> str:
    if value is None:
        return ""
    if isinstance(value, int):
        return str(value)
    return f"{value:.2f}"


@dataclass(frozen=True)
class SolveOutcome:
    tree: SteinerTree
    report: RegretReport
    record: BenchRecord
    limit_reached: bool = False


def solve_method(inst: Instance, method: str, options: SolveOptions) -> SolveOutcome:
    """Run one of :data:`METHODS` on *inst* and describe the result as a record."""
    if method not in METHODS:
        raise ValueError(f"unknown method '{method}'; expected one of {', '.join(METHODS)}")
    logger.info("Solving %s with %s", inst.name or "<unnamed>", method)
    oracle = make_oracle(options.oracle, terminal_cap=options.dw_terminal_cap)
    start = time.perf_counter()
    limit_reached = False
    if method == "benders":
        result = benders_solve(
            inst,
            MasterBackend(options.backend),
            BendersLimits(options.max_iterations, options.time_limit),
            oracle=oracle,
            milp_command=options.milp_cmd,
            edge_cap=options.enumerate_edge_cap,
        )
        tree, report = result.tree, result.report
        limit_reached = result.limit_reached
        fields: dict[str, Any] = {
            "lower_bound": result.lower_bound,
            "gap_pct": result.gap_pct,
            "iterations": result.iterations,
            "optimal": result.optimal,
        }
    elif method == "brute":
        tree, report = minmax_regret_bruteforce(inst)
        fields = {"lower_bound": report.robust_cost, "gap_pct": 0.0, "optimal": True}
    else:
        tree, report = run_heuristic(HeuristicKind(method), inst, oracle)
        # Z >= 0 always, so a zero regret from an exact evaluation is optimal
        proven = report.exact and report.robust_cost == 0
        fields = {"gap_pct": 0.0 if proven else None, "optimal": proven}
    elapsed = time.perf_counter() - start
    record = BenchRecord(
        instance_name=inst.name,
        method=method,
        robust_cost=report.robust_cost,
        wall_time_seconds=elapsed,
        tree=format_tree(inst, tree),
        **fields,
    )
    return SolveOutcome(tree, report, record, limit_reached)


def _run_cell(cell: tuple[Path, str, SolveOptions]) -> BenchRecord:
    path, method, options = cell
    name = path.stem
    try:
        inst = read_steinlib(path)
        record = solve_method(inst, method, options).record
    except (OSError, ValueError, RuntimeError) as exc:
        return BenchRecord(instance_name=name, method=method, error=str(exc))
    return replace(record, instance_name=name)


def with_deviations(records: Sequence[BenchRecord]) -> list[BenchRecord]:
    """Fill ``dev_pct`` of heuristic rows against the exact upper bound per instance.

    The reference is the constraint-generation row of the same instance, or the
    brute-force row when that is missing or failed.
    """
    reference: dict[str, float] = {}
    for preferred in ("brute", "benders"):
        for record in records:
            if record.method == preferred and record.robust_cost is not None:
                reference[record.instance_name] = record.robust_cost
    updated: list[BenchRecord] = []
    for record in records:
        ref = reference.get(record.instance_name)
        if record.method in HEURISTICS and record.robust_cost is not None and ref is not None:
            dev = deviation_percent(int(record.robust_cost), int(ref))
            record = replace(record, dev_pct=dev)
        updated.append(record)
    return updated


def average_rows(records: Sequence[BenchRecord], methods: Sequence[str]) -> list[BenchRecord]:
    """One ``AVG`` row per method over its successful rows."""

    def avg(values: Iterable[float | None]) -> float | None:
        present = [float(value) for value in values if value is not None]
        return mean(present) if present else None

    rows: list[BenchRecord] = []
    for method in methods:
        group = [record for record in records if record.method == method]
        if not group:
            continue
        ok = [record for record in group if record.error is None]
        all_optimal = bool(ok) and len(ok) == len(group) and all(r.optimal for r in ok)
        rows.append(
            BenchRecord(
                instance_name=AVERAGE_NAME,
                method=method,
                robust_cost=avg(r.robust_cost for r in ok),
                lower_bound=avg(r.lower_bound for r in ok),
                gap_pct=0.0 if all_optimal else avg(r.gap_pct for r in ok),
                dev_pct=avg(r.dev_pct for r in ok),
                wall_time_seconds=avg(r.wall_time_seconds for r in ok),
                iterations=avg(r.iterations for r in ok),
                optimal=all_optimal,
            )
        )
    return rows


def run_bench(
    directory: str | Path,
    methods: Sequence[str] = METHODS,
    options: SolveOptions | None = None,
    *,
    jobs: int = 1,
) -> list[BenchRecord]:
    """Solve every ``*.stp`` file in *directory* with every method.

    Rows come back in (instance file name, method) order whatever ``jobs`` is;
    cells that fail are kept as blank rows and logged.
    """
    options = options or SolveOptions()
    unknown = [method for method in methods if method not in METHODS]
    if unknown:
        raise ValueError(f"unknown method(s): {', '.join(unknown)}")
    files = sorted(Path(directory).glob("*.stp"))
    if not files:
        logger.warning("No .stp instances found in %s", directory)
        return []
    cells = [(path, method, options) for path in files for method in methods]
    logger.info("Running %d benchmark cell(s) with %d worker(s)", len(cells), jobs)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_run_cell, cells))
    else:
        records = [_run_cell(cell) for cell in cells]
    for record in records:
        if record.error is not None:
            logger.warning(
                "Benchmark cell %s/%s failed: %s", record.instance_name, record.method, record.error
            )
    records = with_deviations(records)
    return records + average_rows(records, methods)


def write_csv(
    records: Sequence[BenchRecord],
    output: TextIO,
    *,
    timestamp: datetime | None = None,
) -> None:
    """Write the report: a ``# generated`` line, the header, then one line per record."""
    stamp = (timestamp or datetime.now(timezone.utc)).isoformat(timespec="seconds")
    output.write(f"# generated {stamp}\n")
    writer = csv.writer(output, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for record in records:
        writer.writerow(record.csv_row())
