"""Internal shared helpers."""

from __future__ import annotations

from fractions import Fraction
from pathlib import Path

from jinja2 import Environment, FileSystemLoader, StrictUndefined

TEMPLATE_ENV = Environment(
    loader=FileSystemLoader(Path(__file__).resolve().parent / "templates"),
    trim_blocks=True,
    lstrip_blocks=False,
    keep_trailing_newline=True,
    undefined=StrictUndefined,
)


def strip_trailing_whitespace(text: str) -> str:
    """Strip trailing horizontal whitespace from each line while preserving final newline."""
    cleaned = "\n".join(line.rstrip() for line in text.splitlines())
    if text.endswith("\n"):
        cleaned += "\n"
    return cleaned


def gap_percent(lower_bound: int, upper_bound: int) -> float:
    """Return the relative optimality gap ``100 * (UB - LB) / UB`` (0 when UB is 0)."""
    if upper_bound < 0:
        raise ValueError("upper bound must be nonnegative")
    if upper_bound == 0:
        return 0.0
    return float(Fraction(100 * (upper_bound - lower_bound), upper_bound))


def deviation_percent(value: int, reference: int) -> float | None:
    """Return ``100 * (value - reference) / reference``.

    A zero reference yields 0.0 for a zero value and ``None`` otherwise.
    """
    if reference == 0:
        return 0.0 if value == 0 else None
    return float(Fraction(100 * (value - reference), reference))


def parse_nonnegative_int(text: str, *, label: str) -> int:
    """Parse a base-10 nonnegative integer token."""
    token = text.strip()
    digits = token[1:] if token[:1] == "+" else token
    if not digits.isdigit():
        raise ValueError(f"{label} must be a nonnegative integer, got '{text}'")
    return int(digits)
