from __future__ import annotations

import csv
import io
import logging
import shutil
from datetime import datetime, timezone
from pathlib import Path

import pytest

from mmr_stp.bench import (
    AVERAGE_NAME,
    CSV_COLUMNS,
    BenchRecord,
    SolveOptions,
    average_rows,
    run_bench,
    solve_method,
    with_deviations,
    write_csv,
)
from mmr_stp.graph import Instance
from mmr_stp.steinlib import write_steinlib

from conftest import random_instance


@pytest.fixture
def bench_dir(tmp_path: Path, fixtures_dir: Path, au_worse: Instance) -> Path:
    directory = tmp_path / "instances"
    directory.mkdir()
    shutil.copy(fixtures_dir / "tiny1.stp", directory / "a_tiny.stp")
    write_steinlib(au_worse, directory / "b_auworse.stp")
    (directory / "c_broken.stp").write_text("SECTION Graph\n", encoding="utf-8")
    (directory / "notes.txt").write_text("ignored\n", encoding="utf-8")
    return directory


def _strip_times(records: list[BenchRecord]) -> list[BenchRecord]:
    return [
        BenchRecord(**{**record.to_dict(), "wall_time_seconds": None})
        for record in records
    ]


def test_solve_method_records(tiny1: Instance) -> None:
    options = SolveOptions()
    benders = solve_method(tiny1, "benders", options).record
    assert (benders.robust_cost, benders.lower_bound, benders.gap_pct) == (2, 2, 0.0)
    assert benders.iterations == 2
    assert benders.optimal
    assert benders.tree == "1-3,2-3"

    brute = solve_method(tiny1, "brute", options).record
    assert (brute.robust_cost, brute.lower_bound, brute.optimal) == (2, 2, True)

    heuristic = solve_method(tiny1, "am", options).record
    assert heuristic.robust_cost == 2
    assert heuristic.lower_bound is None
    assert heuristic.optimal is False


def test_zero_regret_heuristic_is_optimal(degenerate: Instance) -> None:
    record = solve_method(degenerate, "amu", SolveOptions()).record
    assert (record.robust_cost, record.gap_pct, record.optimal) == (0, 0.0, True)


def test_solve_method_flags_iteration_limit(tiny1: Instance) -> None:
    outcome = solve_method(tiny1, "benders", SolveOptions(max_iterations=1))
    assert outcome.limit_reached
    assert outcome.record.gap_pct == 100.0
    assert outcome.record.optimal is False


def test_solve_method_rejects_unknown_method(tiny1: Instance) -> None:
    with pytest.raises(ValueError, match="unknown method 'ilp'"):
        solve_method(tiny1, "ilp", SolveOptions())


def test_record_formatting() -> None:
    record = BenchRecord("x", "am", robust_cost=2, gap_pct=12.5, wall_time_seconds=0.12345)
    assert record.csv_row() == ["x", "am", "2", "", "12.50", "", "0.123", "", ""]
    assert BenchRecord("x", "benders", optimal=False).csv_row()[-1] == "false"
    assert record.to_dict() == {
        "instance_name": "x",
        "method": "am",
        "robust_cost": 2,
        "gap_pct": 12.5,
        "wall_time_seconds": 0.12345,
    }


def test_record_invariants() -> None:
    with pytest.raises(ValueError, match="nonnegative"):
        BenchRecord("x", "am", gap_pct=-1.0)
    with pytest.raises(ValueError, match="zero gap"):
        BenchRecord("x", "benders", gap_pct=5.0, optimal=True)


def test_deviations_prefer_constraint_generation_reference() -> None:
    records = [
        BenchRecord("a", "brute", robust_cost=4),
        BenchRecord("a", "benders", robust_cost=2),
        BenchRecord("a", "au", robust_cost=3),
        BenchRecord("b", "brute", robust_cost=0),
        BenchRecord("b", "am", robust_cost=1),
        BenchRecord("b", "au", robust_cost=0),
    ]
    updated = {(r.instance_name, r.method): r.dev_pct for r in with_deviations(records)}
    assert updated[("a", "au")] == 50.0
    assert updated[("b", "am")] is None
    assert updated[("b", "au")] == 0.0
    assert updated[("a", "benders")] is None


def test_average_rows_skip_failures() -> None:
    records = [
        BenchRecord("a", "am", robust_cost=2, dev_pct=0.0, optimal=False),
        BenchRecord("b", "am", robust_cost=4, dev_pct=100.0, optimal=False),
        BenchRecord("c", "am", error="boom"),
        BenchRecord("a", "brute", robust_cost=2, gap_pct=0.0, optimal=True),
    ]
    rows = average_rows(records, ["benders", "am", "brute"])
    assert [(row.instance_name, row.method) for row in rows] == [
        (AVERAGE_NAME, "am"),
        (AVERAGE_NAME, "brute"),
    ]
    assert (rows[0].robust_cost, rows[0].dev_pct, rows[0].optimal) == (3.0, 50.0, False)
    assert (rows[1].gap_pct, rows[1].optimal) == (0.0, True)


def test_run_bench_rows(bench_dir: Path) -> None:
    records = run_bench(bench_dir, ["benders", "am", "au"])
    keys = [(record.instance_name, record.method) for record in records]
    assert keys == [
        ("a_tiny", "benders"),
        ("a_tiny", "am"),
        ("a_tiny", "au"),
        ("b_auworse", "benders"),
        ("b_auworse", "am"),
        ("b_auworse", "au"),
        ("c_broken", "benders"),
        ("c_broken", "am"),
        ("c_broken", "au"),
        (AVERAGE_NAME, "benders"),
        (AVERAGE_NAME, "am"),
        (AVERAGE_NAME, "au"),
    ]
    by_key = dict(zip(keys, records))
    assert by_key[("b_auworse", "au")].robust_cost == 8
    assert by_key[("b_auworse", "au")].dev_pct == 300.0
    assert by_key[("a_tiny", "am")].dev_pct == 0.0
    assert "c_broken.stp:1" in (by_key[("c_broken", "am")].error or "")
    average = by_key[(AVERAGE_NAME, "benders")]
    assert (average.robust_cost, average.iterations, average.optimal) == (2.0, 1.5, False)


def test_run_bench_parallel_matches_serial(bench_dir: Path) -> None:
    serial = run_bench(bench_dir, ["am", "amu"], jobs=1)
    parallel = run_bench(bench_dir, ["am", "amu"], jobs=2)
    assert _strip_times(parallel) == _strip_times(serial)


def test_run_bench_empty_directory(tmp_path: Path, caplog: pytest.LogCaptureFixture) -> None:
    with caplog.at_level(logging.WARNING, logger="mmr_stp.bench"):
        assert run_bench(tmp_path) == []
    assert "No .stp instances" in caplog.text
    with pytest.raises(ValueError, match="unknown method"):
        run_bench(tmp_path, ["ilp"])


def test_write_csv(bench_dir: Path) -> None:
    records = run_bench(bench_dir, ["am"])
    buffer = io.StringIO()
    write_csv(records, buffer, timestamp=datetime(2026, 1, 2, 3, 4, 5, tzinfo=timezone.utc))
    lines = buffer.getvalue().splitlines()
    assert lines[0] == "# generated 2026-01-02T03:04:05+00:00"
    rows = list(csv.reader(lines[1:]))
    assert tuple(rows[0]) == CSV_COLUMNS
    assert rows[1][:3] == ["a_tiny", "am", "2"]
    assert rows[1][-1] == "false"
    assert rows[3][2:] == ["", "", "", "", "", "", ""]
    assert rows[-1][0] == AVERAGE_NAME


@pytest.mark.parametrize("seed", range(12))
def test_heuristic_oracle_records_are_valid(seed: int) -> None:
    inst = random_instance(seed, nodes=7, edges=12, terminals=4)
    options = SolveOptions(oracle="sp")
    for method in ("benders", "am", "au", "amu"):
        record = solve_method(inst, method, options).record
        assert record.optimal is False, method
        assert record.gap_pct is None or record.gap_pct >= 0.0
    benders = solve_method(inst, "benders", options).record
    assert benders.lower_bound is not None and benders.robust_cost is not None
    assert benders.lower_bound <= benders.robust_cost
