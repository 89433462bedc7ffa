"""Configuration file discovery, validation and defaults for the CLI."""

from __future__ import annotations

import logging
import os
import sys
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Any

import click
from jsonschema import Draft202012Validator
from packaging.specifiers import InvalidSpecifier, SpecifierSet
from packaging.version import InvalidVersion, Version

from . import __version__
from .milp import MILP_COMMAND_ENV

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - python<3.11
    import tomli as tomllib

logger = logging.getLogger(__name__)

DEFAULT_CONFIG = Path("mmr-config.toml")
PYPROJECT_CONFIG = Path("pyproject.toml")
TOOL_KEY = "mmr-stp"

CONFIG_SCHEMA: dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "required-version": {"type": "string"},
        "minimum-version": {"type": "string"},
        "time-limit": {"type": "number", "exclusiveMinimum": 0},
        "max-iterations": {"type": "integer", "minimum": 1},
        "oracle": {"enum": ["dw", "brute", "sp"]},
        "backend": {"enum": ["enumerate", "external-lp"]},
        "milp-cmd": {"type": "string", "minLength": 1},
        "dw-terminal-cap": {"type": "integer", "minimum": 1},
        "enumerate-edge-cap": {"type": "integer", "minimum": 1},
        "jobs": {"type": "integer", "minimum": 1},
    },
}


@dataclass(frozen=True)
class Settings:
    """Solver and harness settings after merging config file and defaults."""

    time_limit: float = 600.0
    max_iterations: int = 1000
    oracle: str = "dw"
    backend: str = "enumerate"
    milp_cmd: str | None = None
    dw_terminal_cap: int = 16
    enumerate_edge_cap: int = 24
    jobs: int = 1

    def override(self, **values: Any) -> Settings:
        """Return a copy with every non-``None`` value in *values* applied."""
        return replace(self, **{key: value for key, value in values.items() if value is not None})

    def milp_command(self, cli_value: str | None = None) -> str | None:
        """Resolve the solver command: CLI flag, then environment, then config."""
        return cli_value or os.environ.get(MILP_COMMAND_ENV) or self.milp_cmd


def _load_toml(path: Path) -> dict[str, Any]:
    try:
        with path.open("rb") as handle:
            return tomllib.load(handle)
    except FileNotFoundError as exc:
        raise click.ClickException(f"config file not found: {path}") from exc
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise click.ClickException(f"failed to read config {path}: {exc}") from exc


def _has_pyproject_config(config: dict[str, Any]) -> bool:
    tool_raw = config.get("tool")
    return isinstance(tool_raw, dict) and isinstance(tool_raw.get(TOOL_KEY), dict)


def resolve_config_path(path: Path | None) -> Path | None:
    """Explicit path, else ``mmr-config.toml``, else ``pyproject.toml`` with a tool table."""
    if path is not None:
        return path
    if DEFAULT_CONFIG.is_file():
        return DEFAULT_CONFIG
    if PYPROJECT_CONFIG.is_file() and _has_pyproject_config(_load_toml(PYPROJECT_CONFIG)):
        return PYPROJECT_CONFIG
    return None


def check_required_version(config: dict[str, Any]) -> None:
    required_raw = config.get("required-version")
    minimum_raw = config.get("minimum-version")
    if required_raw is None and minimum_raw is None:
        return
    if required_raw is not None and minimum_raw is not None:
        raise click.ClickException(
            "config must not set both 'required-version' and 'minimum-version'"
        )
    if required_raw is not None:
        if not isinstance(required_raw, str) or not required_raw.strip():
            raise click.ClickException("config 'required-version' must be a non-empty string")
        requirement = required_raw.strip()
        try:
            specifier = SpecifierSet(requirement)
        except InvalidSpecifier as exc:
            raise click.ClickException(
                f"config 'required-version' is not a valid version specifier: {required_raw}"
            ) from exc
    else:
        if not isinstance(minimum_raw, str) or not minimum_raw.strip():
            raise click.ClickException("config 'minimum-version' must be a non-empty string")
        try:
            minimum = Version(minimum_raw.strip())
        except InvalidVersion as exc:
            raise click.ClickException(
                f"config 'minimum-version' is not a valid version: {minimum_raw}"
            ) from exc
        requirement = f">={minimum}"
        specifier = SpecifierSet(requirement)

    current = Version(__version__)
    if not specifier.contains(current, prereleases=True):
        raise click.ClickException(
            f"config requires mmr-stp {requirement}, current version is {current}"
        )


def validate_config(config: dict[str, Any], *, source: str) -> None:
    """Validate *config* against :data:`CONFIG_SCHEMA`, reporting the first error."""
    errors = sorted(
        Draft202012Validator(CONFIG_SCHEMA).iter_errors(config),
        key=lambda error: list(error.path),
    )
    if errors:
        error = errors[0]
        location = ".".join(str(part) for part in error.path) or "<root>"
        raise click.ClickException(f"{source}: invalid config at '{location}': {error.message}")


def load_settings(path: Path | None = None) -> tuple[Settings, Path | None]:
    """Load settings from the resolved config file (defaults if there is none)."""
    config_path = resolve_config_path(path)
    if config_path is None:
        logger.debug("No config file found; using defaults")
        return Settings(), None
    raw = _load_toml(config_path)
    if config_path.name == PYPROJECT_CONFIG.name:
        if not _has_pyproject_config(raw):
            raise click.ClickException(f"{config_path} must define [tool.{TOOL_KEY}]")
        raw = raw["tool"][TOOL_KEY]
    validate_config(raw, source=str(config_path))
    check_required_version(raw)
    known = {field.name for field in fields(Settings)}
    values = {
        key.replace("-", "_"): value
        for key, value in raw.items()
        if key.replace("-", "_") in known
    }
    logger.info("Loaded config from %s", config_path)
    return Settings(**values), config_path
