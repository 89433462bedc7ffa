"""Run an external MILP solver on an LP file and read its solution back."""

from __future__ import annotations

import logging
import re
import shlex
import shutil
import subprocess
from dataclasses import dataclass, field
from pathlib import Path

from .graph import Instance

logger = logging.getLogger(__name__)

MILP_COMMAND_ENV = "MMR_STP_MILP_CMD"
INTEGRALITY_TOLERANCE = 1e-6
_ARC_NAME = re.compile(r"^x_(\d+)_(\d+)$")
_INFEASIBLE = {"infeasible", "integer_infeasible", "infeasible_or_unbounded"}


class MilpError(RuntimeError):
    """Base class for external solver failures."""

    category = "milp"

    def __str__(self) -> str:
        return f"{self.category} error: {super().__str__()}"


class MilpConfigurationError(MilpError):
    category = "configuration"


class MilpRunError(MilpError):
    category = "solver"


class MilpTimeoutError(MilpError):
    category = "timeout"


class MilpInfeasibleError(MilpError):
    category = "infeasible"


class MilpSolutionError(MilpError):
    category = "solution"


@dataclass(frozen=True)
class MilpResult:
    """Parsed solution file: binaries rounded to 0/1, ``theta`` kept as read."""

    values: dict[str, float] = field(default_factory=dict)
    objective: float | None = None
    status: str = "optimal"


def read_solution(text: str, *, source: str = "<solution>") -> MilpResult:
    """Parse whitespace-separated ``name value`` lines.

    ``status <word>`` and ``objective <value>`` lines are recognised; ``#``
    starts a comment. ``x_*``/``y_*`` values within the integrality tolerance
    of 0 or 1 are rounded, anything else is rejected.
    """
    values: dict[str, float] = {}
    objective: float | None = None
    status = "optimal"
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if len(tokens) != 2:
            raise MilpSolutionError(f"{source}:{number}: expected 'name value', got '{line}'")
        name, value_text = tokens
        if name.lower() == "status":
            status = value_text.lower()
            continue
        try:
            value = float(value_text)
        except ValueError as exc:
            raise MilpSolutionError(
                f"{source}:{number}: value of '{name}' is not a number: {value_text}"
            ) from exc
        if name.lower() == "objective":
            objective = value
            continue
        if name.startswith(("x_", "y_")):
            rounded = round(value)
            if rounded not in (0, 1) or abs(value - rounded) > INTEGRALITY_TOLERANCE:
                raise MilpSolutionError(f"{source}:{number}: '{name}' is not binary: {value}")
            value = float(rounded)
        values[name] = value
    if status in _INFEASIBLE:
        raise MilpInfeasibleError(f"{source}: solver reported status '{status}'")
    return MilpResult(values, objective, status)


def build_command(solver_command: str, lp_path: Path, sol_path: Path) -> list[str]:
    """Split the command template and substitute ``{lp}`` and ``{sol}``."""
    if "{lp}" not in solver_command:
        raise MilpConfigurationError("solver command must contain the '{lp}' placeholder")
    argv = [
        token.replace("{lp}", str(lp_path)).replace("{sol}", str(sol_path))
        for token in shlex.split(solver_command)
    ]
    if not argv:
        raise MilpConfigurationError("solver command is empty")
    return argv


def external_backend_run(
    lp_path: Path,
    solver_command: str,
    *,
    timeout: float | None = None,
    solution_path: Path | None = None,
) -> MilpResult:
    """Run the configured solver on *lp_path* and parse its solution file."""
    sol_path = solution_path or lp_path.with_suffix(".sol")
    argv = build_command(solver_command, lp_path, sol_path)
    executable = shutil.which(argv[0])
    if executable is None:
        raise MilpConfigurationError(f"solver executable not found: {argv[0]}")
    argv[0] = executable
    logger.debug("Running MILP solver: %s", shlex.join(argv))
    try:
        completed = subprocess.run(
            argv,
            capture_output=True,
            text=True,
            timeout=timeout,
            check=False,
        )
    except subprocess.TimeoutExpired as exc:
        raise MilpTimeoutError(f"solver exceeded {timeout:.1f} s") from exc
    if completed.returncode != 0:
        detail = (completed.stderr or completed.stdout).strip().splitlines()[-5:]
        raise MilpRunError(
            f"solver exited with status {completed.returncode}"
            + (": " + " | ".join(detail) if detail else "")
        )
    if not sol_path.is_file():
        raise MilpSolutionError(f"solver did not write a solution file at {sol_path}")
    return read_solution(sol_path.read_text(encoding="utf-8"), source=str(sol_path))


def selected_edges(inst: Instance, values: dict[str, float]) -> set[int]:
    """Map arc variables set to 1 back to edge ids of *inst*."""
    edges: set[int] = set()
    for name, value in values.items():
        match = _ARC_NAME.match(name)
        if match is None or value < 0.5:
            continue
        key = frozenset((int(match.group(1)), int(match.group(2))))
        edge_id = inst.edge_lookup.get(key)
        if edge_id is None:
            raise MilpSolutionError(f"solution variable '{name}' is not an arc of the instance")
        edges.add(edge_id)
    return edges
