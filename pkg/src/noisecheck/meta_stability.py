"""Repeat the sanity check under independent seeds and measure how often it passes.

Seeds for cell ``(n, k)`` and repetition ``r``:

* dataset: ``SeedSpec(hash_words(master, EXPERIMENT, n), DATASET, repetition=r)``
  (shared by every ``k`` for the same ``n`` and ``r``; in fixed-dataset
  mode ``r`` is always 0);
* noise: ``SeedSpec(hash_words(master, EXPERIMENT, n, k), NOISE, repetition=r)``.

Every repetition is an independent job, so results do not depend on how
the jobs are scheduled.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Sequence

import numpy as np

from .errors import ExperimentError, InvalidInputError
from .sanity_check import (
    DEFAULT_GRID,
    DegradationCurve,
    EpsilonGrid,
    degradation_curve,
    monotonicity_verdict,
)
from .stats_core import roughness
from .synthetic import SyntheticSpec, generate
from .vector_space import NoiseShape, Purpose, SeedSpec, hash_words

__all__ = [
    "ExperimentConfig",
    "RunRecord",
    "StabilityCell",
    "StabilityReport",
    "stability_experiment",
    "k_sweep_curves",
    "DEFAULT_SIZES",
    "DEFAULT_KS",
]

DEFAULT_SIZES = (30, 65, 3000)
DEFAULT_KS = (5, 10, 50, 250, 500)


@dataclass(frozen=True)
class ExperimentConfig:
    grid: EpsilonGrid = DEFAULT_GRID
    shape: NoiseShape = NoiseShape.PER_COORDINATE
    tolerance: float = 0.0
    dimension: int = 100
    fixed_dataset: bool = False

    def to_dict(self) -> dict[str, Any]:
        return {
            "grid": list(self.grid.levels),
            "shape": NoiseShape(self.shape).value,
            "tolerance": self.tolerance,
            "dimension": self.dimension,
            "fixed_dataset": self.fixed_dataset,
        }


@dataclass(frozen=True)
class RunRecord:
    """Outcome of one repetition, kept for audit dumps."""

    n_pairs: int
    k: int
    repetition: int
    passed: bool
    first_violation: int | None
    roughness: float
    degenerate_samples: int


@dataclass(frozen=True)
class StabilityCell:
    n_pairs: int
    k: int
    repetitions: int
    pass_count: int
    mean_roughness: float

    def __post_init__(self):
        if self.repetitions < 1:
            raise InvalidInputError("repetitions must be >= 1")
        if not 0 <= self.pass_count <= self.repetitions:
            raise InvalidInputError("pass_count must lie in [0, repetitions]")

    @property
    def pass_rate(self) -> float:
        return self.pass_count / self.repetitions

    @property
    def pass_rate_stderr(self) -> float:
        """Normal-approximation standard error of the pass rate."""
        p = self.pass_rate
        return math.sqrt(p * (1.0 - p) / self.repetitions)

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["pass_rate"] = self.pass_rate
        d["pass_rate_stderr"] = self.pass_rate_stderr
        return d


@dataclass(frozen=True)
class StabilityReport:
    cells: tuple[StabilityCell, ...]
    master_seed: int
    config: ExperimentConfig
    runs: tuple[RunRecord, ...] = field(default=(), compare=False)

    def cell(self, n_pairs: int, k: int) -> StabilityCell:
        for c in self.cells:
            if c.n_pairs == n_pairs and c.k == k:
                return c
        raise KeyError((n_pairs, k))

    def to_dict(self, include_runs: bool = False) -> dict[str, Any]:
        d: dict[str, Any] = {
            "master_seed": self.master_seed,
            "config": self.config.to_dict(),
            "cells": [c.to_dict() for c in self.cells],
        }
        if include_runs:
            d["runs"] = [asdict(r) for r in self.runs]
        return d


def _dataset_seed(master: int, n: int, repetition: int, fixed: bool) -> SeedSpec:
    return SeedSpec(
        hash_words(master, Purpose.EXPERIMENT, n), Purpose.DATASET, 0 if fixed else repetition
    )


def _noise_seed(master: int, n: int, k: int, repetition: int) -> SeedSpec:
    return SeedSpec(hash_words(master, Purpose.EXPERIMENT, n, k), Purpose.NOISE, repetition)


def _run_one(job: tuple[int, int, int, int, ExperimentConfig]) -> RunRecord:
    master, n, k, r, cfg = job
    ds, table = generate(SyntheticSpec(n, cfg.dimension, _dataset_seed(master, n, r, cfg.fixed_dataset)))
    curve = degradation_curve(ds, table, cfg.grid, k, cfg.shape, _noise_seed(master, n, k, r))
    verdict = monotonicity_verdict(curve, cfg.tolerance)
    return RunRecord(n, k, r, verdict.passed, verdict.first_violation,
                     roughness(curve.means), curve.degenerate_samples)


def _guarded(job):
    try:
        return _run_one(job)
    except Exception as exc:  # surfaced per cell by the caller
        return exc


def stability_experiment(
    sizes: Sequence[int] = DEFAULT_SIZES,
    ks: Sequence[int] = DEFAULT_KS,
    repetitions: int = 100,
    config: ExperimentConfig | None = None,
    master_seed: int = 0,
    *,
    jobs: int = 1,
) -> StabilityReport:
    """Pass count and mean curve roughness for every ``(n, k)`` combination.

    ``jobs > 1`` spreads repetitions over worker processes; the report is
    identical for any value.
    """
    cfg = config or ExperimentConfig()
    if int(repetitions) != repetitions or repetitions < 1:
        raise InvalidInputError("repetitions must be a positive integer")
    if not sizes or not ks:
        raise InvalidInputError("sizes and ks must be non-empty")
    for n in sizes:
        if int(n) != n or n < 2:
            raise InvalidInputError(f"dataset sizes must be integers >= 2, got {n!r}")
    for k in ks:
        if int(k) != k or k < 1:
            raise InvalidInputError(f"k values must be positive integers, got {k!r}")
    SeedSpec(master_seed)

    grid_cells = [(int(n), int(k)) for n in sizes for k in ks]
    work = [(master_seed, n, k, r, cfg) for n, k in grid_cells for r in range(repetitions)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_guarded, work, chunksize=max(1, len(work) // (8 * jobs))))
    else:
        results = [_guarded(w) for w in work]

    cells = []
    for ci, (n, k) in enumerate(grid_cells):
        block = results[ci * repetitions:(ci + 1) * repetitions]
        for r, res in enumerate(block):
            if isinstance(res, BaseException):
                raise ExperimentError(f"cell (n={n}, k={k}) aborted: repetition {r} failed: {res!r}") from res
        cells.append(StabilityCell(
            n_pairs=n,
            k=k,
            repetitions=int(repetitions),
            pass_count=sum(rec.passed for rec in block),
            mean_roughness=float(np.mean([rec.roughness for rec in block])),
        ))
    return StabilityReport(tuple(cells), master_seed, cfg, runs=tuple(results))


def k_sweep_noise_seed(seed: int, index: int) -> SeedSpec:
    """Noise stream used for the ``index``-th curve of :func:`k_sweep_curves`."""
    return SeedSpec(seed, Purpose.NOISE, repetition=index)


def k_sweep_curves(
    n: int,
    ks: Sequence[int],
    config: ExperimentConfig | None = None,
    seed: int = 0,
) -> list[DegradationCurve]:
    """One mean curve per ``k`` over a single synthetic instance of size ``n``.

    Each ``k`` gets its own noise streams, so the curves are independent
    given the dataset.
    """
    cfg = config or ExperimentConfig()
    if not ks:
        raise InvalidInputError("ks must be non-empty")
    ds, table = generate(SyntheticSpec(n, cfg.dimension, SeedSpec(seed, Purpose.DATASET)))
    curves = []
    for j, k in enumerate(ks):
        c = degradation_curve(ds, table, cfg.grid, k, cfg.shape, k_sweep_noise_seed(seed, j))
        curves.append(DegradationCurve(
            c.points, label=f"k={k}", seed=c.seed, repetition=c.repetition,
            shape=c.shape, dimension=c.dimension, degenerate_samples=c.degenerate_samples,
        ))
    return curves
