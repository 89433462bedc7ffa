"""Smoke tests for the command line interface."""

from __future__ import annotations

import importlib
import json
import os
import shutil
import subprocess
import sys
from pathlib import Path
from typing import Any

import pytest
from click.testing import CliRunner

from mmr_stp.graph import Instance
from mmr_stp.steinlib import read_steinlib, write_steinlib

from conftest import random_instance

cli_module: Any = importlib.import_module("mmr_stp.cli")


@pytest.fixture(autouse=True)
def _isolated_cwd(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("MMR_STP_MILP_CMD", raising=False)


@pytest.fixture
def tiny1_file(fixtures_dir: Path) -> Path:
    return fixtures_dir / "tiny1.stp"


def _invoke(*args: str) -> Any:
    return CliRunner().invoke(cli_module.cli, list(args))


def _json(result: Any) -> dict[str, Any]:
    assert result.exit_code in (0, 5), result.output
    # stderr may follow the document when the runner mixes streams
    payload, _ = json.JSONDecoder().raw_decode(result.stdout)
    assert isinstance(payload, dict)
    return payload


def test_cli_help_shows_subcommands() -> None:
    root = Path(__file__).resolve().parents[1] / "src"
    env = os.environ.copy()
    env["PYTHONPATH"] = f"{root}{os.pathsep}{env.get('PYTHONPATH', '')}"
    result = subprocess.run(
        [sys.executable, "-m", "mmr_stp.cli", "--help"],
        check=True,
        capture_output=True,
        text=True,
        env=env,
    )
    for sub in ["gen", "gen-suite", "solve", "eval", "bench", "export-lp"]:
        assert sub in result.stdout


@pytest.mark.parametrize(("method", "expected"), [("amu", 2), ("brute", 2), ("benders", 2)])
def test_solve_methods(tiny1_file: Path, method: str, expected: int) -> None:
    payload = _json(_invoke("solve", str(tiny1_file), "--method", method))
    assert payload["instance"] == "TINY1"
    assert payload["method"] == method
    assert payload["robust_cost"] == expected
    assert "tree" not in payload


def test_solve_with_certificate(tiny1_file: Path) -> None:
    payload = _json(_invoke("solve", str(tiny1_file), "--certificate"))
    assert payload["tree"] == "1-3,2-3"
    assert payload["optimal"] is True
    assert payload["certificate"]["adversary_tree"] == "1-2"
    assert payload["certificate"]["worst_scenario"] == [4, 3, 3]


def test_solve_deterministic_scenarios(tiny1_file: Path) -> None:
    payload = _json(
        _invoke("solve", str(tiny1_file), "--method", "stp-exact", "--scenario", "midpoint")
    )
    assert (payload["cost"], payload["tree"], payload["scenario"]) == (4, "1-3,2-3", "midpoint")
    payload = _json(
        _invoke("solve", str(tiny1_file), "--method", "stp-heur", "--scenario", "lower")
    )
    assert (payload["cost"], payload["optimal"]) == (2, False)


def test_solve_iteration_limit_exits_with_gap(tiny1_file: Path) -> None:
    result = _invoke("solve", str(tiny1_file), "--max-iterations", "1")
    assert result.exit_code == 5
    payload = _json(result)
    assert payload["gap_pct"] == 100.0
    assert payload["optimal"] is False


def test_solve_exit_codes(tmp_path: Path, tiny1_file: Path, fixtures_dir: Path) -> None:
    assert _invoke("solve", str(tmp_path / "missing.stp")).exit_code == 3
    broken = tmp_path / "broken.stp"
    broken.write_text("SECTION Graph\nNodes 2\nE 1 3 1\nEND\nEOF\n", encoding="utf-8")
    result = _invoke("solve", str(broken))
    assert result.exit_code == 3
    assert "broken.stp:3: reference error" in result.output
    assert _invoke("solve", str(tiny1_file), "--method", "eval").exit_code == 2
    capped = _invoke(
        "solve", str(fixtures_dir / "wrp3-11-synthetic.stp"), "--method", "am", "--oracle", "brute"
    )
    assert capped.exit_code == 4
    assert "capped at 16 edges" in capped.output
    external = _invoke("solve", str(tiny1_file), "--backend", "external-lp")
    assert external.exit_code == 4
    assert "configuration error" in external.output


def test_eval_command(tiny1_file: Path) -> None:
    payload = _json(_invoke("eval", str(tiny1_file), "--tree", "1-2"))
    assert payload["robust_cost"] == 6
    assert payload["adversary_tree"] == "1-3,2-3"
    via_solve = _json(_invoke("solve", str(tiny1_file), "--method", "eval", "--tree", "2-3,1-3"))
    assert via_solve["robust_cost"] == 2
    invalid = _invoke("eval", str(tiny1_file), "--tree", "1-3")
    assert invalid.exit_code == 3
    assert "terminal 2 uncovered" in invalid.output


def test_root_override(tiny1_file: Path) -> None:
    payload = _json(_invoke("eval", str(tiny1_file), "--tree", "1-2", "--root", "2"))
    assert payload["robust_cost"] == 6
    assert _invoke("eval", str(tiny1_file), "--tree", "1-2", "--root", "3").exit_code == 3


def test_gen_writes_interval_instance(tmp_path: Path, degenerate: Instance) -> None:
    base = tmp_path / "det5.stp"
    write_steinlib(degenerate, base)
    result = _invoke("gen", "--method", "be", "--param", "0.1", "--base", str(base))
    assert result.exit_code == 0, result.output
    assert "E 1 2 2 4" in result.stdout
    assert "# generator BE param 0.1" in result.stdout

    output = tmp_path / "out" / "det5_mo.stp"
    args = ["gen", "--method", "MO", "--param", "750", "--seed", "3", "--base", str(base)]
    assert _invoke(*args, "-o", str(output)).exit_code == 0
    assert read_steinlib(output).name == "DET5-MO-750"


def test_gen_rejects_interval_base(tiny1_file: Path) -> None:
    result = _invoke("gen", "--method", "kz", "--param", "10", "--base", str(tiny1_file))
    assert result.exit_code == 1
    assert "degenerate" in result.output


def test_gen_suite(tmp_path: Path, degenerate: Instance) -> None:
    base = tmp_path / "det5.stp"
    write_steinlib(degenerate, base)
    result = _invoke("gen-suite", str(base), "-o", str(tmp_path / "suite"), "--seed", "9")
    assert result.exit_code == 0, result.output
    assert len(list((tmp_path / "suite").glob("*/*.stp"))) == 9


def test_bench_writes_csv(tmp_path: Path, tiny1_file: Path) -> None:
    directory = tmp_path / "instances"
    directory.mkdir()
    shutil.copy(tiny1_file, directory / "tiny1.stp")
    report = tmp_path / "reports" / "bench.csv"
    result = _invoke("bench", str(directory), "--methods", "benders,am", "-o", str(report))
    assert result.exit_code == 0, result.output
    lines = report.read_text(encoding="utf-8").splitlines()
    assert lines[0].startswith("# generated ")
    assert lines[1] == "instance,method,Z,LB,gap_pct,dev_pct,time_s,iters,optimal"
    assert lines[2].startswith("tiny1,benders,2,2,0.00,,")
    assert lines[2].endswith(",2,true")
    assert lines[3].startswith("tiny1,am,2,,,0.00,")
    assert len(lines) == 6


def test_bench_rejects_bad_arguments(tmp_path: Path) -> None:
    assert _invoke("bench", str(tmp_path), "--methods", "benders,ilp").exit_code == 2
    assert _invoke("bench", str(tmp_path / "nowhere")).exit_code == 3


def test_export_lp(tmp_path: Path, tiny1_file: Path) -> None:
    master = tmp_path / "master.lp"
    result = _invoke("export-lp", str(tiny1_file), "--model", "master", "-o", str(master))
    assert result.exit_code == 0, result.output
    text = master.read_text(encoding="ascii")
    assert " cut_1:" in text and " cut_2:" not in text

    explicit = tmp_path / "explicit.lp"
    result = _invoke(
        "export-lp",
        str(tiny1_file),
        "--model",
        "master",
        "--cut",
        "1-2",
        "--cut",
        "1-3,2-3",
        "-o",
        str(explicit),
    )
    assert result.exit_code == 0, result.output
    assert " cut_2: 1 theta - 2 x_1_3" in explicit.read_text(encoding="ascii")

    stp = tmp_path / "stp.lp"
    assert _invoke("export-lp", str(tiny1_file), "-o", str(stp)).exit_code == 0
    assert "Bounds" not in stp.read_text(encoding="ascii")


def test_main_returns_exit_codes(tmp_path: Path, tiny1_file: Path) -> None:
    assert cli_module.main(["--version"]) == 0
    assert cli_module.main(["solve", str(tmp_path / "missing.stp")]) == 3
    assert cli_module.main(["-q", "solve", str(tiny1_file), "--method", "am"]) == 0


def test_solve_with_heuristic_oracle(tmp_path: Path) -> None:
    path = tmp_path / "rand0.stp"
    write_steinlib(random_instance(0, nodes=7, edges=12, terminals=4), path)
    payload = _json(_invoke("solve", str(path), "--method", "benders", "--oracle", "sp"))
    assert payload["optimal"] is False
    assert payload["gap_pct"] >= 0.0
