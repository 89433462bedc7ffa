"""SteinLib STP reader and the interval extension reader/writer."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import NoReturn, TextIO

from ._utils import TEMPLATE_ENV, parse_nonnegative_int, strip_trailing_whitespace
from .graph import Edge, Instance, InstanceError

logger = logging.getLogger(__name__)

FORMAT_HEADER = "# mmr-stp interval format v1"
STEINLIB_MAGIC = "33D32945"


class SteinLibError(ValueError):
    """Base class for line-located STP file errors."""

    category = "steinlib"

    def __init__(self, message: str, *, source: str, line: int) -> None:
        self.message = message
        self.source = source
        self.line = line
        super().__init__(self.__str__())

    def __str__(self) -> str:
        return f"{self.source}:{self.line}: {self.category} error: {self.message}"


class SteinLibSyntaxError(SteinLibError):
    category = "syntax"


class SteinLibReferenceError(SteinLibError):
    category = "reference"


class SteinLibIntervalError(SteinLibError):
    category = "interval"


class SteinLibConnectivityError(SteinLibError):
    category = "connectivity"


class SteinLibTerminalError(SteinLibError):
    category = "terminals"


@dataclass
class _Draft:
    name: str = ""
    comments: list[str] = field(default_factory=list)
    nodes: int | None = None
    declared_edges: int | None = None
    declared_terminals: int | None = None
    edges: list[Edge] = field(default_factory=list)
    edge_keys: dict[frozenset[int], int] = field(default_factory=dict)
    terminals: list[int] = field(default_factory=list)
    root: int | None = None
    graph_line: int | None = None
    graph_end: int | None = None
    terminals_end: int | None = None


def read_steinlib(path: str | Path, *, root: int | None = None) -> Instance:
    """Read an STP file (plain or interval costs) from *path*."""
    file_path = Path(path)
    logger.debug("Reading STP file %s", file_path)
    text = file_path.read_text(encoding="utf-8")
    instance = parse_steinlib(text, source=str(file_path), root=root)
    if not instance.name:
        return Instance(
            node_count=instance.node_count,
            edges=instance.edges,
            terminals=instance.terminals,
            root=instance.root,
            name=file_path.stem,
            comments=instance.comments,
        )
    return instance


def parse_steinlib(
    text: str | TextIO,
    *,
    source: str = "<input>",
    root: int | None = None,
) -> Instance:
    """Parse SteinLib STP text into a validated :class:`Instance`.

    ``E i j c`` lines set ``l = u = c``; ``E i j l u`` lines carry intervals.
    The root is *root* if given, else a ``Root`` line, else the lowest-id
    terminal.
    """
    parser = _Parser(text if isinstance(text, str) else text.read(), source=source)
    return parser.parse(root_override=root)


class _Parser:
    def __init__(self, text: str, *, source: str) -> None:
        self.lines = text.splitlines()
        self.source = source
        self.draft = _Draft()
        self.section: str | None = None
        self.section_line = 0

    def _error(self, kind: type[SteinLibError], message: str, line: int) -> NoReturn:
        raise kind(message, source=self.source, line=line)

    def parse(self, *, root_override: int | None) -> Instance:
        last_line = 0
        for number, raw in enumerate(self.lines, start=1):
            last_line = number
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                if line != FORMAT_HEADER:
                    self.draft.comments.append(line[1:].strip())
                continue
            tokens = line.split()
            keyword = tokens[0].lower()
            if self.section is None:
                if keyword == "eof":
                    break
                if tokens[0].upper().startswith(STEINLIB_MAGIC):
                    continue
                if keyword != "section":
                    self._error(SteinLibSyntaxError, f"unexpected line '{line}'", number)
                if len(tokens) != 2:
                    self._error(SteinLibSyntaxError, "SECTION needs exactly one name", number)
                self.section = tokens[1].lower()
                self.section_line = number
                if self.section == "graph":
                    if self.draft.graph_line is not None:
                        self._error(SteinLibSyntaxError, "duplicate Graph section", number)
                    self.draft.graph_line = number
                continue
            if keyword == "end":
                self._close_section(number)
                continue
            if self.section == "comment":
                self._comment_line(line, tokens)
            elif self.section == "graph":
                self._graph_line(tokens, number)
            elif self.section == "terminals":
                self._terminal_line(tokens, number)
        if self.section is not None:
            self._error(
                SteinLibSyntaxError,
                f"section '{self.section}' opened on line {self.section_line} is not closed",
                last_line,
            )
        return self._build(root_override, last_line)

    def _close_section(self, number: int) -> None:
        draft = self.draft
        if self.section == "graph":
            if draft.nodes is None:
                self._error(SteinLibSyntaxError, "Graph section does not declare Nodes", number)
            if draft.declared_edges is not None and draft.declared_edges != len(draft.edges):
                self._error(
                    SteinLibSyntaxError,
                    f"declared {draft.declared_edges} edges, found {len(draft.edges)}",
                    number,
                )
            draft.graph_end = number
        elif self.section == "terminals":
            if (
                draft.declared_terminals is not None
                and draft.declared_terminals != len(draft.terminals)
            ):
                self._error(
                    SteinLibSyntaxError,
                    f"declared {draft.declared_terminals} terminals, found {len(draft.terminals)}",
                    number,
                )
            draft.terminals_end = number
        self.section = None

    def _comment_line(self, line: str, tokens: list[str]) -> None:
        if tokens[0].lower() == "name":
            self.draft.name = line[len(tokens[0]) :].strip().strip('"')

    def _int(self, token: str, label: str, number: int) -> int:
        try:
            return parse_nonnegative_int(token, label=label)
        except ValueError as exc:
            self._error(SteinLibSyntaxError, str(exc), number)

    def _node(self, token: str, number: int) -> int:
        draft = self.draft
        if draft.nodes is None:
            self._error(SteinLibSyntaxError, "node reference before Nodes declaration", number)
        node = self._int(token, "node id", number)
        if not 1 <= node <= draft.nodes:
            self._error(
                SteinLibReferenceError, f"node {node} outside 1..{draft.nodes}", number
            )
        return node

    def _graph_line(self, tokens: list[str], number: int) -> None:
        draft = self.draft
        keyword = tokens[0].lower()
        if keyword in {"nodes", "edges"}:
            if len(tokens) != 2:
                self._error(SteinLibSyntaxError, f"'{tokens[0]}' needs one count", number)
            count = self._int(tokens[1], f"{tokens[0]} count", number)
            if keyword == "nodes":
                if count <= 0:
                    self._error(SteinLibSyntaxError, "Nodes must be positive", number)
                draft.nodes = count
            else:
                draft.declared_edges = count
            return
        if keyword == "a":
            self._error(SteinLibSyntaxError, "directed arcs are not supported", number)
        if keyword != "e":
            self._error(SteinLibSyntaxError, f"unknown Graph keyword '{tokens[0]}'", number)
        if len(tokens) not in {4, 5}:
            self._error(
                SteinLibSyntaxError, "edge line must be 'E i j c' or 'E i j l u'", number
            )
        a = self._node(tokens[1], number)
        b = self._node(tokens[2], number)
        if a == b:
            self._error(SteinLibReferenceError, f"self-loop at node {a}", number)
        key = frozenset((a, b))
        if key in draft.edge_keys:
            self._error(
                SteinLibReferenceError,
                f"edge {a}-{b} duplicates the edge on line {draft.edge_keys[key]}",
                number,
            )
        lower = self._int(tokens[3], "edge cost", number)
        upper = self._int(tokens[4], "edge cost", number) if len(tokens) == 5 else lower
        if lower > upper:
            self._error(
                SteinLibIntervalError, f"lower cost {lower} exceeds upper cost {upper}", number
            )
        draft.edge_keys[key] = number
        draft.edges.append(Edge(a, b, lower, upper))

    def _terminal_line(self, tokens: list[str], number: int) -> None:
        draft = self.draft
        keyword = tokens[0].lower()
        if len(tokens) != 2:
            self._error(SteinLibSyntaxError, f"'{tokens[0]}' needs one value", number)
        if keyword == "terminals":
            draft.declared_terminals = self._int(tokens[1], "Terminals count", number)
        elif keyword == "t":
            terminal = self._node(tokens[1], number)
            if terminal in draft.terminals:
                self._error(SteinLibSyntaxError, f"terminal {terminal} listed twice", number)
            draft.terminals.append(terminal)
        elif keyword == "root":
            draft.root = self._node(tokens[1], number)
        else:
            self._error(SteinLibSyntaxError, f"unknown Terminals keyword '{tokens[0]}'", number)

    def _build(self, root_override: int | None, last_line: int) -> Instance:
        draft = self.draft
        if draft.graph_line is None or draft.nodes is None:
            self._error(SteinLibSyntaxError, "missing SECTION Graph", last_line or 1)
        terminal_line = draft.terminals_end or last_line or 1
        if not draft.terminals:
            self._error(SteinLibTerminalError, "terminal set is empty", terminal_line)
        if root_override is not None:
            root = root_override
        elif draft.root is not None:
            root = draft.root
        else:
            root = min(draft.terminals)
        if root not in draft.terminals:
            self._error(SteinLibTerminalError, f"root {root} is not a terminal", terminal_line)
        try:
            return Instance(
                node_count=draft.nodes,
                edges=tuple(draft.edges),
                terminals=frozenset(draft.terminals),
                root=root,
                name=draft.name,
                comments=tuple(draft.comments),
            )
        except InstanceError as exc:
            line = draft.graph_end or draft.graph_line
            if exc.category == "connectivity":
                self._error(SteinLibConnectivityError, str(exc), line)
            self._error(SteinLibSyntaxError, str(exc), line)


def format_steinlib(inst: Instance, *, comments: tuple[str, ...] | None = None) -> str:
    """Render *inst* in the interval STP format."""
    rendered = TEMPLATE_ENV.get_template("instance.stp.j2").render(
        {
            "header": FORMAT_HEADER,
            "magic": f"{STEINLIB_MAGIC} STP File, STP Format Version 1.0",
            "comments": inst.comments if comments is None else comments,
            "name": inst.name.replace('"', "'"),
            "inst": inst,
            "terminals": sorted(inst.terminals),
        }
    )
    return strip_trailing_whitespace(rendered)


def write_steinlib(
    inst: Instance,
    output: str | Path,
    *,
    comments: tuple[str, ...] | None = None,
) -> None:
    """Write *inst* in the interval STP format to *output*."""
    output_path = Path(output)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    output_path.write_text(format_steinlib(inst, comments=comments), encoding="utf-8")
