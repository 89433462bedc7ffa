"""Seeded interval-instance generators (BE, MO and KZ recipes)."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from .graph import Edge, Instance
from .steinlib import write_steinlib

logger = logging.getLogger(__name__)

RNG_NAME = "numpy PCG64"
RECIPE_VERSION = "v1"
SUITE_BETAS = (0.1, 0.3, 0.5)
SUITE_MS = (750, 1000, 1250)
_SEED_LIMIT = 2**64


class GeneratorError(ValueError):
    """Invalid generator configuration or base instance."""


class GeneratorMethod(str, Enum):
    BE = "BE"
    MO = "MO"
    KZ = "KZ"


@dataclass(frozen=True)
class GeneratorConfig:
    """Recipe and parameter: ``beta`` for BE, ``m`` for MO and KZ."""

    method: GeneratorMethod
    beta: float | None = None
    m: int | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "method", GeneratorMethod(self.method.upper()))
        if not 0 <= self.seed < _SEED_LIMIT:
            raise GeneratorError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.method is GeneratorMethod.BE:
            if self.beta is None or not 0 < self.beta < 1:
                raise GeneratorError(f"BE needs beta in (0, 1), got {self.beta}")
        elif self.m is None or self.m <= 0:
            raise GeneratorError(f"{self.method.value} needs a positive M, got {self.m}")

    @classmethod
    def from_param(
        cls,
        method: GeneratorMethod | str,
        param: str,
        seed: int = 0,
    ) -> GeneratorConfig:
        """Build a config from a textual parameter (``0.3`` for BE, ``750`` otherwise)."""
        kind = GeneratorMethod(method.upper())
        try:
            if kind is GeneratorMethod.BE:
                return cls(kind, beta=float(param), seed=seed)
            return cls(kind, m=int(param), seed=seed)
        except ValueError as exc:
            if isinstance(exc, GeneratorError):
                raise
            raise GeneratorError(f"invalid {kind.value} parameter '{param}'") from exc

    @property
    def param(self) -> str:
        return str(self.beta) if self.method is GeneratorMethod.BE else str(self.m)

    @property
    def label(self) -> str:
        return f"{self.method.value}-{self.param}"


def _be_bounds(edges: Sequence[Edge], beta: float) -> list[tuple[int, int]]:
    ratio = Fraction(str(beta))
    return [
        (math.floor((1 - ratio) * edge.lower), math.ceil((1 + ratio) * edge.lower))
        for edge in edges
    ]


def _mo_bounds(count: int, m: int, rng: np.random.Generator) -> list[tuple[int, int]]:
    bounds = []
    for _ in range(count):
        lower = int(rng.integers(0, m, endpoint=True))
        bounds.append((lower, lower + int(rng.integers(0, m, endpoint=True))))
    return bounds


def _kz_bounds(count: int, m: int, rng: np.random.Generator) -> list[tuple[int, int]]:
    bounds = []
    for _ in range(count):
        base = int(rng.integers(1, m, endpoint=True))
        lower = int(rng.integers(0, base, endpoint=True))
        bounds.append((lower, base + int(rng.integers(0, base, endpoint=True))))
    return bounds


def generate(base: Instance, cfg: GeneratorConfig) -> Instance:
    """Turn a deterministic instance into an interval instance.

    BE widens each cost ``c`` to ``[floor((1-beta) c), ceil((1+beta) c)]``.
    MO draws ``l`` in ``[0, M]`` and ``u = l + [0, M]``. KZ draws ``c'`` in
    ``[1, M]``, then ``l`` in ``[0, c']`` and ``u = c' + [0, c']``. Draws are
    taken edge by edge from a PCG64 stream seeded with ``cfg.seed``.
    """
    if not base.is_degenerate:
        raise GeneratorError("base instance must have degenerate intervals (l = u)")
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    if cfg.method is GeneratorMethod.BE:
        assert cfg.beta is not None
        bounds = _be_bounds(base.edges, cfg.beta)
    elif cfg.method is GeneratorMethod.MO:
        assert cfg.m is not None
        bounds = _mo_bounds(base.edge_count, cfg.m, rng)
    else:
        assert cfg.m is not None
        bounds = _kz_bounds(base.edge_count, cfg.m, rng)
    edges = tuple(
        Edge(edge.a, edge.b, lower, upper) for edge, (lower, upper) in zip(base.edges, bounds)
    )
    comments = (
        f"generator {cfg.method.value} param {cfg.param}",
        f"seed {cfg.seed} rng {RNG_NAME}",
        f"base {base.name or '<unnamed>'}",
        f"recipes {RECIPE_VERSION}",
    )
    name = f"{base.name}-{cfg.label}" if base.name else cfg.label
    return Instance(
        node_count=base.node_count,
        edges=edges,
        terminals=base.terminals,
        root=base.root,
        name=name,
        comments=comments,
    )


def suite_configs(seed: int = 0) -> list[GeneratorConfig]:
    """The nine suite configurations: BE over the betas, MO and KZ over the Ms."""
    configs = [GeneratorConfig(GeneratorMethod.BE, beta=beta, seed=seed) for beta in SUITE_BETAS]
    for method in (GeneratorMethod.MO, GeneratorMethod.KZ):
        configs += [GeneratorConfig(method, m=m, seed=seed) for m in SUITE_MS]
    return configs


def generate_suite(
    bases: Sequence[Instance],
    output_dir: str | Path,
    *,
    seed: int = 0,
    replicates: int = 1,
) -> list[Path]:
    """Write one directory per configuration, ``<METHOD>-<param>/<base>[_<r>].stp``.

    Replicate ``r`` of base ``i`` uses seed ``seed + i * replicates + r`` in
    every configuration.
    """
    if replicates <= 0:
        raise GeneratorError("replicates must be positive")
    root = Path(output_dir)
    written: list[Path] = []
    for template in suite_configs(seed):
        directory = root / template.label
        directory.mkdir(parents=True, exist_ok=True)
        for index, base in enumerate(bases):
            stem = base.name or f"instance{index + 1}"
            for replicate in range(replicates):
                cfg = GeneratorConfig(
                    template.method,
                    beta=template.beta,
                    m=template.m,
                    seed=seed + index * replicates + replicate,
                )
                suffix = f"_{replicate + 1}" if replicates > 1 else ""
                path = directory / f"{stem}{suffix}.stp"
                write_steinlib(generate(base, cfg), path)
                written.append(path)
        logger.info("Generated %s instances in %s", template.label, directory)
    return written
