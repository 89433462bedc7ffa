"""Tests for config discovery, validation and precedence."""

from __future__ import annotations

import importlib
from pathlib import Path
from textwrap import dedent
from typing import Any

import click
import pytest
from click.testing import CliRunner

from mmr_stp._config import (
    Settings,
    check_required_version,
    load_settings,
    resolve_config_path,
    validate_config,
)

cli_module: Any = importlib.import_module("mmr_stp.cli")


def test_resolve_config_path_without_config(
    tmp_path: Path,
    monkeypatch: pytest.MonkeyPatch,
) -> None:
    monkeypatch.chdir(tmp_path)
    (tmp_path / "pyproject.toml").write_text("[project]\nname = \"demo\"\n", encoding="utf-8")

    assert resolve_config_path(None) is None
    assert load_settings(None) == (Settings(), None)


def test_resolve_config_path_prefers_mmr_config(
    tmp_path: Path,
    monkeypatch: pytest.MonkeyPatch,
) -> None:
    (tmp_path / "mmr-config.toml").write_text("jobs = 2\n", encoding="utf-8")
    (tmp_path / "pyproject.toml").write_text(
        "[tool.mmr-stp]\nminimum-version = \"9999\"\n",
        encoding="utf-8",
    )
    monkeypatch.chdir(tmp_path)

    assert resolve_config_path(None) == Path("mmr-config.toml")
    settings, path = load_settings(None)
    assert settings.jobs == 2
    assert path == Path("mmr-config.toml")


def test_load_settings_reads_pyproject_tool_section(tmp_path: Path) -> None:
    pyproject = tmp_path / "pyproject.toml"
    pyproject.write_text(
        dedent(
            """
            [project]
            name = "demo"
            version = "0.1.0"

            [tool.mmr-stp]
            required-version = ">=0"
            time-limit = 30
            oracle = "brute"
            backend = "external-lp"
            milp-cmd = "highs {lp}"
            """
        ),
        encoding="utf-8",
    )

    settings, path = load_settings(pyproject)

    assert path == pyproject
    assert settings == Settings(
        time_limit=30,
        oracle="brute",
        backend="external-lp",
        milp_cmd="highs {lp}",
    )


def test_pyproject_without_tool_table_is_rejected(tmp_path: Path) -> None:
    pyproject = tmp_path / "pyproject.toml"
    pyproject.write_text("[project]\nname = \"demo\"\n", encoding="utf-8")
    with pytest.raises(click.ClickException, match=r"must define \[tool.mmr-stp\]"):
        load_settings(pyproject)


@pytest.mark.parametrize(
    ("config", "location", "message"),
    [
        ({"oracle": "ilp"}, "oracle", "is not one of"),
        ({"time-limit": 0}, "time-limit", "less than or equal to the minimum"),
        ({"max-iterations": 1.5}, "max-iterations", "is not of type 'integer'"),
        ({"colour": "red"}, "<root>", "Additional properties"),
    ],
)
def test_validate_config_reports_first_error(
    config: dict[str, Any], location: str, message: str
) -> None:
    with pytest.raises(click.ClickException) as info:
        validate_config(config, source="mmr-config.toml")
    assert f"mmr-config.toml: invalid config at '{location}'" in info.value.message
    assert message in info.value.message


@pytest.mark.parametrize(
    ("config", "message"),
    [
        ({"required-version": ">=9999"}, "config requires mmr-stp >=9999"),
        ({"minimum-version": "9999"}, "config requires mmr-stp >=9999"),
        ({"required-version": "~~1"}, "not a valid version specifier"),
        ({"minimum-version": "one"}, "not a valid version"),
        ({"required-version": ">=0", "minimum-version": "0"}, "must not set both"),
    ],
)
def test_check_required_version(config: dict[str, Any], message: str) -> None:
    with pytest.raises(click.ClickException, match=message):
        check_required_version(config)


def test_required_version_accepts_current() -> None:
    check_required_version({"required-version": ">=0"})
    check_required_version({})


def test_settings_override_and_milp_precedence(monkeypatch: pytest.MonkeyPatch) -> None:
    settings = Settings(milp_cmd="from-config {lp}")
    overridden = settings.override(jobs=None, oracle="sp")
    assert overridden == Settings(milp_cmd="from-config {lp}", oracle="sp")
    monkeypatch.delenv("MMR_STP_MILP_CMD", raising=False)
    assert settings.milp_command() == "from-config {lp}"
    monkeypatch.setenv("MMR_STP_MILP_CMD", "from-env {lp}")
    assert settings.milp_command() == "from-env {lp}"
    assert settings.milp_command("from-cli {lp}") == "from-cli {lp}"


def test_cli_applies_config_and_flags(
    tmp_path: Path,
    monkeypatch: pytest.MonkeyPatch,
    fixtures_dir: Path,
) -> None:
    monkeypatch.chdir(tmp_path)
    (tmp_path / "mmr-config.toml").write_text("max-iterations = 1\n", encoding="utf-8")
    instance = str(fixtures_dir / "tiny1.stp")
    runner = CliRunner()

    limited = runner.invoke(cli_module.cli, ["solve", instance])
    assert limited.exit_code == 5

    overridden = runner.invoke(cli_module.cli, ["solve", instance, "--max-iterations", "5"])
    assert overridden.exit_code == 0, overridden.output


def test_cli_rejects_invalid_config(
    tmp_path: Path,
    fixtures_dir: Path,
) -> None:
    config = tmp_path / "custom.toml"
    config.write_text("oracle = \"ilp\"\n", encoding="utf-8")
    instance = str(fixtures_dir / "tiny1.stp")
    result = CliRunner().invoke(
        cli_module.cli, ["--config", str(config), "eval", instance, "--tree", "1-2"]
    )
    assert result.exit_code == 1
    assert "invalid config at 'oracle'" in result.output

    broken = tmp_path / "broken.toml"
    broken.write_text("oracle = \n", encoding="utf-8")
    result = CliRunner().invoke(cli_module.cli, ["--config", str(broken), "eval", instance, "-h"])
    assert result.exit_code == 1
    assert "failed to read config" in result.output
