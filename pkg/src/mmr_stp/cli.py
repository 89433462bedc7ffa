"""Command line interface for mmr-stp."""

from __future__ import annotations

import json
import logging
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any

import click
from click.exceptions import Exit

from . import __version__
from ._config import Settings, load_settings
from .bench import METHODS, SolveOptions, run_bench, solve_method, write_csv
from .benders import MasterError
from .codegen_lp import LpModelKind, export_lp
from .graph import Instance, SteinerTree, format_tree, parse_tree, validate_tree
from .heuristics import algorithm_mean, algorithm_upper
from .instgen import GeneratorConfig, GeneratorError, GeneratorMethod, generate, generate_suite
from .milp import MilpError
from .regret import robust_cost
from .scenario import (
    Scenario,
    ScenarioError,
    lower_scenario,
    midpoint_scenario,
    upper_scenario,
)
from .steinlib import format_steinlib, read_steinlib, write_steinlib
from .stp import (
    OracleLimitError,
    make_oracle,
    solve_bruteforce,
    solve_exact_dw,
    solve_heuristic_sp,
)

logger = logging.getLogger(__name__)

_CONTEXT_SETTINGS = {"help_option_names": ["-h", "--help"]}
_SCENARIOS = {"lower": lower_scenario, "upper": upper_scenario, "midpoint": midpoint_scenario}
_STP_METHODS = ("stp-exact", "stp-bruteforce", "stp-heur")
_SOLVE_METHODS = (*METHODS, *_STP_METHODS, "eval")
_SOLVE_ERRORS = (OracleLimitError, MasterError, MilpError, ScenarioError, GeneratorError)


class InstanceLoadError(click.ClickException):
    """Instance or tree certificate could not be read."""

    exit_code = 3


class SolveFailedError(click.ClickException):
    """An oracle, master problem or external solver failed."""

    exit_code = 4


class TimeLimitExceeded(click.ClickException):
    """Constraint generation stopped at a cap before proving optimality."""

    exit_code = 5


def _configure_logging(verbose: int, quiet: int) -> None:
    base_level = logging.INFO
    level = base_level - (10 * verbose) + (10 * quiet)
    level = max(logging.DEBUG, min(logging.CRITICAL, level))
    logging.basicConfig(level=level, format="%(levelname)s: %(message)s")


def _load_instance(path: Path, *, root: int | None = None) -> Instance:
    try:
        logger.info("Reading instance %s", path)
        return read_steinlib(path, root=root)
    except OSError as exc:
        raise InstanceLoadError(f"cannot read instance {path}: {exc.strerror or exc}") from exc
    except ValueError as exc:
        raise InstanceLoadError(str(exc)) from exc


def _load_tree(inst: Instance, text: str) -> SteinerTree:
    try:
        tree = parse_tree(inst, text)
    except ValueError as exc:
        raise InstanceLoadError(f"invalid tree certificate: {exc}") from exc
    check = validate_tree(inst, tree)
    if not check:
        raise InstanceLoadError(f"tree certificate is not a Steiner tree: {check.reason}")
    return tree


def _echo_json(payload: dict[str, Any]) -> None:
    click.echo(json.dumps(payload, indent=2))


def _true_cost(cost: int, scale: int) -> int | float:
    value = Fraction(cost, scale)
    return int(value) if value.denominator == 1 else float(value)


def _settings(ctx: click.Context) -> Settings:
    settings = ctx.find_object(Settings)
    return settings if settings is not None else Settings()


def _solve_options(settings: Settings, milp_cmd: str | None) -> SolveOptions:
    return SolveOptions(
        oracle=settings.oracle,
        backend=settings.backend,
        time_limit=settings.time_limit,
        max_iterations=settings.max_iterations,
        milp_cmd=settings.milp_command(milp_cmd),
        dw_terminal_cap=settings.dw_terminal_cap,
        enumerate_edge_cap=settings.enumerate_edge_cap,
    )


_oracle_option = click.option(
    "--oracle",
    type=click.Choice(["dw", "brute", "sp"]),
    default=None,
    help="STP oracle [config 'oracle', default: dw].",
)
_backend_option = click.option(
    "--backend",
    type=click.Choice(["enumerate", "external-lp"]),
    default=None,
    help="Master problem backend [config 'backend', default: enumerate].",
)
_milp_option = click.option(
    "--milp-cmd",
    default=None,
    metavar="TEMPLATE",
    help="Solver command with {lp} and {sol} placeholders (or MMR_STP_MILP_CMD).",
)
_time_option = click.option(
    "--time-limit",
    type=click.FloatRange(min=0, min_open=True),
    default=None,
    help="Time cap in seconds [config 'time-limit', default: 600].",
)


@click.group(context_settings=_CONTEXT_SETTINGS)
@click.version_option(__version__, "-V", "--version", prog_name="mmr-stp")
@click.option("--verbose", "-v", count=True, help="Increase verbosity (repeatable).")
@click.option("--quiet", "-q", count=True, help="Decrease verbosity (repeatable).")
@click.option(
    "--config",
    "config_path",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    default=None,
    show_default="mmr-config.toml, then pyproject.toml [tool.mmr-stp]",
)
@click.pass_context
def cli(ctx: click.Context, verbose: int, quiet: int, config_path: Path | None) -> None:
    """Min-max regret Steiner trees with interval costs."""
    _configure_logging(verbose, quiet)
    settings, _ = load_settings(config_path)
    ctx.obj = settings


@cli.command("gen", context_settings=_CONTEXT_SETTINGS)
@click.option(
    "--method",
    type=click.Choice(["be", "mo", "kz"], case_sensitive=False),
    required=True,
)
@click.option("--param", required=True, help="beta for BE, M for MO and KZ.")
@click.option("--seed", type=click.IntRange(min=0), default=0, show_default=True)
@click.option("--base", "base_path", type=click.Path(path_type=Path), required=True)
@click.option("--output", "-o", type=click.Path(dir_okay=False, path_type=Path), default=None)
def gen(method: str, param: str, seed: int, base_path: Path, output: Path | None) -> None:
    """Generate an interval instance from a deterministic base instance."""
    base = _load_instance(base_path)
    try:
        cfg = GeneratorConfig.from_param(GeneratorMethod(method.upper()), param, seed)
        inst = generate(base, cfg)
    except GeneratorError as exc:
        raise click.ClickException(str(exc)) from exc
    if output is None:
        click.echo(format_steinlib(inst), nl=False)
        return
    logger.info("Writing %s instance to %s", cfg.label, output)
    write_steinlib(inst, output)


@cli.command("gen-suite", context_settings=_CONTEXT_SETTINGS)
@click.argument("bases", nargs=-1, required=True, type=click.Path(path_type=Path))
@click.option(
    "--output-dir",
    "-o",
    type=click.Path(file_okay=False, path_type=Path),
    required=True,
)
@click.option("--seed", type=click.IntRange(min=0), default=0, show_default=True)
@click.option("--replicates", type=click.IntRange(min=1), default=1, show_default=True)
def gen_suite(bases: tuple[Path, ...], output_dir: Path, seed: int, replicates: int) -> None:
    """Generate the BE/MO/KZ suite from one or more base instances."""
    instances = [_load_instance(path) for path in bases]
    try:
        written = generate_suite(instances, output_dir, seed=seed, replicates=replicates)
    except GeneratorError as exc:
        raise click.ClickException(str(exc)) from exc
    logger.info("Wrote %d instance file(s) under %s", len(written), output_dir)


def _solve_stp(
    inst: Instance,
    method: str,
    scenario: Scenario,
    settings: Settings,
) -> dict[str, Any]:
    if method == "stp-exact":
        solution = solve_exact_dw(inst, scenario, terminal_cap=settings.dw_terminal_cap)
    elif method == "stp-bruteforce":
        solution = solve_bruteforce(inst, scenario)
    else:
        solution = solve_heuristic_sp(inst, scenario)
    return {
        "cost": _true_cost(solution.cost, solution.scale),
        "optimal": solution.optimal,
        "tree": format_tree(inst, solution.tree),
    }


def _eval_payload(inst: Instance, tree: SteinerTree, settings: Settings) -> dict[str, Any]:
    oracle = make_oracle(settings.oracle, terminal_cap=settings.dw_terminal_cap)
    report = robust_cost(inst, tree, oracle)
    return {"tree": format_tree(inst, tree), **report.to_dict(inst)}


@cli.command("solve", context_settings=_CONTEXT_SETTINGS)
@click.argument("instance_path", type=click.Path(path_type=Path))
@click.option(
    "--method",
    type=click.Choice(_SOLVE_METHODS),
    default="benders",
    show_default=True,
)
@click.option("--tree", "tree_text", default=None, help="Tree certificate for --method eval.")
@click.option(
    "--scenario",
    type=click.Choice(sorted(_SCENARIOS)),
    default="upper",
    show_default=True,
    help="Scenario for the stp-* methods.",
)
@_oracle_option
@_backend_option
@_milp_option
@_time_option
@click.option("--max-iterations", type=click.IntRange(min=1), default=None)
@click.option("--root", type=click.IntRange(min=1), default=None, help="Override the root.")
@click.option("--certificate", is_flag=True, help="Include the tree and its regret report.")
@click.pass_context
def solve(
    ctx: click.Context,
    instance_path: Path,
    method: str,
    tree_text: str | None,
    scenario: str,
    oracle: str | None,
    backend: str | None,
    milp_cmd: str | None,
    time_limit: float | None,
    max_iterations: int | None,
    root: int | None,
    certificate: bool,
) -> None:
    """Solve an instance and print the result as JSON."""
    settings = _settings(ctx).override(
        oracle=oracle,
        backend=backend,
        time_limit=time_limit,
        max_iterations=max_iterations,
    )
    inst = _load_instance(instance_path, root=root)
    payload: dict[str, Any] = {"instance": inst.name, "method": method}
    try:
        if method in _STP_METHODS:
            payload["scenario"] = scenario
            payload.update(_solve_stp(inst, method, _SCENARIOS[scenario](inst), settings))
        elif method == "eval":
            if tree_text is None:
                raise click.UsageError("--method eval needs --tree")
            payload.update(_eval_payload(inst, _load_tree(inst, tree_text), settings))
        else:
            outcome = solve_method(inst, method, _solve_options(settings, milp_cmd))
            record = outcome.record.to_dict()
            if not certificate:
                record.pop("tree", None)
            else:
                record["certificate"] = outcome.report.to_dict(inst)
            payload.update(record)
            _echo_json(payload)
            if outcome.limit_reached:
                raise TimeLimitExceeded(
                    f"stopped at a limit with gap {outcome.record.gap_pct:.2f}%"
                )
            return
    except _SOLVE_ERRORS as exc:
        raise SolveFailedError(str(exc)) from exc
    _echo_json(payload)


@cli.command("eval", context_settings=_CONTEXT_SETTINGS)
@click.argument("instance_path", type=click.Path(path_type=Path))
@click.option("--tree", "tree_text", required=True, help="Tree certificate such as 1-3,2-3.")
@_oracle_option
@click.option("--root", type=click.IntRange(min=1), default=None)
@click.pass_context
def evaluate(
    ctx: click.Context,
    instance_path: Path,
    tree_text: str,
    oracle: str | None,
    root: int | None,
) -> None:
    """Print the robust cost of a tree certificate."""
    settings = _settings(ctx).override(oracle=oracle)
    inst = _load_instance(instance_path, root=root)
    tree = _load_tree(inst, tree_text)
    try:
        payload = {"instance": inst.name, **_eval_payload(inst, tree, settings)}
    except _SOLVE_ERRORS as exc:
        raise SolveFailedError(str(exc)) from exc
    _echo_json(payload)


def _parse_methods(text: str) -> list[str]:
    methods = [item.strip() for item in text.split(",") if item.strip()]
    unknown = [method for method in methods if method not in METHODS]
    if unknown or not methods:
        raise click.BadParameter(
            f"expected a comma-separated subset of {','.join(METHODS)}", param_hint="--methods"
        )
    return methods


@cli.command("bench", context_settings=_CONTEXT_SETTINGS)
@click.argument("directory", type=click.Path(file_okay=False, path_type=Path))
@click.option("--methods", default=",".join(METHODS), show_default=True)
@_oracle_option
@_backend_option
@_milp_option
@_time_option
@click.option("--max-iterations", type=click.IntRange(min=1), default=None)
@click.option("--jobs", "-j", type=click.IntRange(min=1), default=None)
@click.option("--output", "-o", type=click.Path(dir_okay=False, path_type=Path), default=None)
@click.pass_context
def bench(
    ctx: click.Context,
    directory: Path,
    methods: str,
    oracle: str | None,
    backend: str | None,
    milp_cmd: str | None,
    time_limit: float | None,
    max_iterations: int | None,
    jobs: int | None,
    output: Path | None,
) -> None:
    """Run every method on every instance of a directory and write a CSV report."""
    settings = _settings(ctx).override(
        oracle=oracle,
        backend=backend,
        time_limit=time_limit,
        max_iterations=max_iterations,
        jobs=jobs,
    )
    if not directory.is_dir():
        raise InstanceLoadError(f"benchmark directory not found: {directory}")
    records = run_bench(
        directory,
        _parse_methods(methods),
        _solve_options(settings, milp_cmd),
        jobs=settings.jobs,
    )
    if output is None:
        write_csv(records, sys.stdout)
        return
    output.parent.mkdir(parents=True, exist_ok=True)
    with output.open("w", encoding="utf-8", newline="") as handle:
        write_csv(records, handle)
    logger.info("Wrote %d row(s) to %s", len(records), output)


@cli.command("export-lp", context_settings=_CONTEXT_SETTINGS)
@click.argument("instance_path", type=click.Path(path_type=Path))
@click.option(
    "--model",
    type=click.Choice([kind.value for kind in LpModelKind]),
    default=LpModelKind.STP.value,
    show_default=True,
)
@click.option(
    "--scenario",
    type=click.Choice(sorted(_SCENARIOS)),
    default="upper",
    show_default=True,
)
@click.option(
    "--cut",
    "cut_texts",
    multiple=True,
    help="Cut tree certificate for the master model (repeatable; default: AM and AU trees).",
)
@_oracle_option
@click.option("--root", type=click.IntRange(min=1), default=None)
@click.option(
    "--output",
    "-o",
    type=click.Path(dir_okay=False, path_type=Path),
    required=True,
)
@click.pass_context
def export_lp_command(
    ctx: click.Context,
    instance_path: Path,
    model: str,
    scenario: str,
    cut_texts: tuple[str, ...],
    oracle: str | None,
    root: int | None,
    output: Path,
) -> None:
    """Write the flow STP model or the master problem as an LP file."""
    settings = _settings(ctx).override(oracle=oracle)
    inst = _load_instance(instance_path, root=root)
    cuts = [_load_tree(inst, text) for text in cut_texts]
    try:
        if model == LpModelKind.MASTER.value and not cuts:
            solver = make_oracle(settings.oracle, terminal_cap=settings.dw_terminal_cap)
            cuts = [algorithm_mean(inst, solver)[0]]
            upper_tree = algorithm_upper(inst, solver)[0]
            if upper_tree != cuts[0]:
                cuts.append(upper_tree)
        export_lp(inst, model, output, scenario=_SCENARIOS[scenario](inst), cuts=cuts)
    except _SOLVE_ERRORS as exc:
        raise SolveFailedError(str(exc)) from exc
    except OSError as exc:
        raise click.ClickException(f"cannot write {output}: {exc}") from exc


def main(argv: list[str] | None = None) -> int:
    """Entry point for the CLI."""
    try:
        cli.main(args=argv, prog_name="mmr-stp", standalone_mode=False)
    except Exit as exc:
        return exc.exit_code
    except click.ClickException as exc:
        exc.show()
        return exc.exit_code
    except click.Abort:  # pragma: no cover - interactive interrupt
        click.echo("Aborted!", err=True)
        return 1
    return 0


if __name__ == "__main__":  # pragma: no cover - CLI entry point
    raise SystemExit(main())
