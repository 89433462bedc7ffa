"""LP-format export of the flow STP model and the regret master problem."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Sequence

from ._utils import TEMPLATE_ENV, strip_trailing_whitespace
from .graph import Instance, SteinerTree, bidirect
from .scenario import Scenario

logger = logging.getLogger(__name__)

THETA = "theta"
_TERMS_PER_LINE = 6


class LpModelKind(str, Enum):
    """Model written by :func:`export_lp`."""

    STP = "stp"
    MASTER = "master"


@dataclass(frozen=True)
class LpRow:
    """One linear constraint ``sum(coef * var) sense rhs``."""

    name: str
    terms: tuple[tuple[int, str], ...]
    sense: str
    rhs: int

    @property
    def lines(self) -> list[str]:
        return _wrap(self.terms)


def arc_variable(tail: int, head: int) -> str:
    return f"x_{tail}_{head}"


def flow_variable(tail: int, head: int, commodity: int) -> str:
    return f"y_{tail}_{head}_{commodity}"


def _wrap(terms: Sequence[tuple[int, str]]) -> list[str]:
    if not terms:
        return ["0"]
    parts: list[str] = []
    for index, (coef, name) in enumerate(terms):
        text = f"{abs(coef)} {name}"
        if coef < 0:
            parts.append(f"- {text}")
        elif index:
            parts.append(f"+ {text}")
        else:
            parts.append(text)
    return [
        " ".join(parts[start : start + _TERMS_PER_LINE])
        for start in range(0, len(parts), _TERMS_PER_LINE)
    ]


def _flow_rows(inst: Instance) -> tuple[list[LpRow], list[str]]:
    """Flow conservation, arc linking and edge orientation rows.

    One unit of commodity ``k`` leaves the root and enters ``k``; flow on an
    arc needs the arc, and each edge is used in at most one direction.
    """
    model = bidirect(inst)
    commodities = sorted(inst.terminals - {inst.root})
    incoming: dict[int, list[int]] = {node: [] for node in range(1, inst.node_count + 1)}
    outgoing: dict[int, list[int]] = {node: [] for node in range(1, inst.node_count + 1)}
    for arc_id, (tail, head) in enumerate(model.arcs):
        outgoing[tail].append(arc_id)
        incoming[head].append(arc_id)

    rows: list[LpRow] = []
    for k in commodities:
        for node in range(1, inst.node_count + 1):
            terms = [(1, flow_variable(*model.arcs[a], k)) for a in incoming[node]]
            terms += [(-1, flow_variable(*model.arcs[a], k)) for a in outgoing[node]]
            rhs = -1 if node == inst.root else 1 if node == k else 0
            rows.append(LpRow(f"flow_{node}_{k}", tuple(terms), "=", rhs))
    for k in commodities:
        for tail, head in model.arcs:
            rows.append(
                LpRow(
                    f"link_{tail}_{head}_{k}",
                    ((1, flow_variable(tail, head, k)), (-1, arc_variable(tail, head))),
                    "<=",
                    0,
                )
            )
    for edge in inst.edges:
        rows.append(
            LpRow(
                f"edge_{edge.a}_{edge.b}",
                ((1, arc_variable(edge.a, edge.b)), (1, arc_variable(edge.b, edge.a))),
                "<=",
                1,
            )
        )
    binaries = [arc_variable(*arc) for arc in model.arcs]
    binaries += [flow_variable(*arc, k) for k in commodities for arc in model.arcs]
    return rows, binaries


def _render(
    *,
    title: str,
    comments: list[str],
    objective: list[tuple[int, str]],
    rows: list[LpRow],
    binaries: list[str],
    free: list[str],
) -> str:
    template = TEMPLATE_ENV.get_template("model.lp.j2")
    rendered = template.render(
        title=title,
        # LP files stay ASCII; non-ASCII names become "?"
        comments=[line.encode("ascii", "replace").decode("ascii") for line in comments],
        objective=_wrap(objective),
        rows=rows,
        binaries=binaries,
        free=free,
    )
    return strip_trailing_whitespace(rendered)


def render_stp_lp(inst: Instance, scenario: Scenario) -> str:
    """Render the multi-commodity flow STP model for *scenario*."""
    scenario.check_dimension(inst)
    rows, binaries = _flow_rows(inst)
    objective: list[tuple[int, str]] = []
    for edge, cost in zip(inst.edges, scenario.costs):
        objective += [(cost, arc_variable(edge.a, edge.b)), (cost, arc_variable(edge.b, edge.a))]
    comments = [f"instance {inst.name or '<unnamed>'}, root {inst.root}"]
    if scenario.scale != 1:
        comments.append(f"objective coefficients are scaled by {scenario.scale}")
    return _render(
        title="Steiner tree flow model",
        comments=comments,
        objective=objective,
        rows=rows,
        binaries=binaries,
        free=[],
    )


def render_master_lp(inst: Instance, cut_trees: Sequence[SteinerTree]) -> str:
    """Render the regret master problem restricted to the given cut trees.

    ``theta`` is bounded by the cost of every cut tree in the worst-case
    scenario of the candidate, ``sum(l_e + (u_e - l_e) * x_e)`` over its edges.
    """
    if not cut_trees:
        raise ValueError("master model needs at least one cut")
    rows, binaries = _flow_rows(inst)
    objective: list[tuple[int, str]] = []
    for edge in inst.edges:
        objective += [
            (edge.upper, arc_variable(edge.a, edge.b)),
            (edge.upper, arc_variable(edge.b, edge.a)),
        ]
    objective.append((-1, THETA))
    for index, tree in enumerate(cut_trees, start=1):
        terms: list[tuple[int, str]] = [(1, THETA)]
        rhs = 0
        for edge_id in tree.key:
            edge = inst.edges[edge_id]
            rhs += edge.lower
            if edge.width:
                terms += [
                    (-edge.width, arc_variable(edge.a, edge.b)),
                    (-edge.width, arc_variable(edge.b, edge.a)),
                ]
        rows.append(LpRow(f"cut_{index}", tuple(terms), "<=", rhs))
    return _render(
        title="Min-max regret master problem",
        comments=[
            f"instance {inst.name or '<unnamed>'}, root {inst.root}, {len(cut_trees)} cut(s)"
        ],
        objective=objective,
        rows=rows,
        binaries=binaries,
        free=[THETA],
    )


def write_master_lp(inst: Instance, cut_trees: Sequence[SteinerTree], path: Path) -> None:
    path.write_text(render_master_lp(inst, cut_trees), encoding="ascii")


def export_lp(
    inst: Instance,
    model: LpModelKind | str,
    output: str | Path,
    *,
    scenario: Scenario | None = None,
    cuts: Sequence[SteinerTree] = (),
) -> Path:
    """Write the selected model to *output* and return the path."""
    model = LpModelKind(model)
    if model is LpModelKind.STP:
        if scenario is None:
            raise ValueError("stp model needs a scenario")
        rendered = render_stp_lp(inst, scenario)
    else:
        rendered = render_master_lp(inst, cuts)
    output_path = Path(output)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    output_path.write_text(rendered, encoding="ascii")
    logger.info("Wrote %s model to %s", model.value, output_path)
    return output_path
