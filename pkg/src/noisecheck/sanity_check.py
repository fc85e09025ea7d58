"""Noise-injection sanity check for a similarity dataset.

For each noise magnitude on a grid, ``k`` independent noisy copies of the
vector table are scored against the dataset and Spearman's rho is averaged.
The dataset passes when the resulting mean curve never rises.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from . import _kernel
from .errors import DegenerateInputError, InvalidInputError, MissingVocabularyError
from .stats_core import average_ranks, mean_and_variance, spearman_rho
from .synthetic import SimilarityDataset
from .vector_space import (
    NoiseShape,
    NoiseSpec,
    Purpose,
    SeedSpec,
    VectorTable,
    cosine,
    perturb_table,
)

__all__ = [
    "EpsilonGrid",
    "DEFAULT_GRID",
    "CurvePoint",
    "DegradationCurve",
    "CheckVerdict",
    "score_dataset",
    "degradation_curve",
    "monotonicity_verdict",
    "run_check",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class EpsilonGrid:
    """Strictly increasing noise magnitudes starting at 0."""

    levels: tuple[float, ...]

    def __post_init__(self):
        levels = tuple(float(x) for x in self.levels)
        if not levels:
            raise InvalidInputError("grid must have at least one level")
        if not all(math.isfinite(x) for x in levels):
            raise InvalidInputError("grid levels must be finite")
        if levels[0] != 0.0:
            raise InvalidInputError(f"grid must start at 0, got {levels[0]}")
        if any(b <= a for a, b in zip(levels, levels[1:])):
            raise InvalidInputError("grid levels must be strictly increasing")
        object.__setattr__(self, "levels", levels)

    @classmethod
    def linear(cls, eps_max: float = 3.0, steps: int = 31) -> "EpsilonGrid":
        if steps < 2 or not eps_max > 0:
            raise InvalidInputError("linear grid needs eps_max > 0 and steps >= 2")
        return cls(tuple(eps_max * i / (steps - 1) for i in range(steps)))

    def __len__(self) -> int:
        return len(self.levels)

    def __iter__(self):
        return iter(self.levels)


DEFAULT_GRID = EpsilonGrid.linear(3.0, 31)


@dataclass(frozen=True)
class CurvePoint:
    epsilon: float
    mean_rho: float
    var_rho: float
    k: int

    def __post_init__(self):
        if not -1.0 <= self.mean_rho <= 1.0:
            raise InvalidInputError(f"mean_rho out of [-1, 1]: {self.mean_rho}")
        if not self.var_rho >= 0.0:
            raise InvalidInputError(f"var_rho must be >= 0: {self.var_rho}")
        if self.k < 1:
            raise InvalidInputError("k must be >= 1")


@dataclass(frozen=True)
class DegradationCurve:
    """Mean and variance of rho per noise level, in grid order."""

    points: tuple[CurvePoint, ...]
    label: str = ""
    seed: int | None = None
    repetition: int | None = None
    shape: NoiseShape | None = None
    dimension: int | None = None
    degenerate_samples: int = 0

    def __post_init__(self):
        pts = tuple(self.points)
        if not pts:
            raise InvalidInputError("curve has no points")
        eps = [p.epsilon for p in pts]
        assert all(b > a for a, b in zip(eps, eps[1:])), "curve points must follow the grid order"
        object.__setattr__(self, "points", pts)

    @property
    def epsilons(self) -> np.ndarray:
        return np.array([p.epsilon for p in self.points])

    @property
    def means(self) -> np.ndarray:
        return np.array([p.mean_rho for p in self.points])

    @property
    def variances(self) -> np.ndarray:
        return np.array([p.var_rho for p in self.points])

    @property
    def k(self) -> int:
        return self.points[0].k

    @property
    def grid(self) -> EpsilonGrid:
        return EpsilonGrid(tuple(p.epsilon for p in self.points))

    def to_dict(self) -> dict[str, Any]:
        return {
            "label": self.label,
            "seed": self.seed,
            "repetition": self.repetition,
            "shape": self.shape.value if self.shape is not None else None,
            "dimension": self.dimension,
            "k": self.k,
            "degenerate_samples": self.degenerate_samples,
            "points": [
                {"epsilon": p.epsilon, "mean_rho": p.mean_rho, "var_rho": p.var_rho, "k": p.k}
                for p in self.points
            ],
        }


@dataclass(frozen=True)
class CheckVerdict:
    passed: bool
    first_violation: int | None
    curve: DegradationCurve
    tolerance: float = 0.0

    def __post_init__(self):
        if self.passed != (self.first_violation is None):
            raise InvalidInputError("passed must be true exactly when there is no violation")

    @property
    def violation_epsilon(self) -> float | None:
        if self.first_violation is None:
            return None
        return self.curve.points[self.first_violation].epsilon

    def to_dict(self) -> dict[str, Any]:
        return {
            "passed": self.passed,
            "first_violation": self.first_violation,
            "violation_epsilon": self.violation_epsilon,
            "tolerance": self.tolerance,
            "curve": self.curve.to_dict(),
        }


def _check_vocabulary(ds: SimilarityDataset, table: VectorTable) -> None:
    missing = [w for w in ds.words if w not in table]
    if missing:
        raise MissingVocabularyError(missing)


def score_dataset(ds: SimilarityDataset, table: VectorTable) -> np.ndarray:
    """Cosine of each pair's vectors, in dataset order."""
    _check_vocabulary(ds, table)
    return np.array([cosine(table[a], table[b]) for a, b, _ in ds])


def _as_seed(seed: SeedSpec | int) -> SeedSpec:
    if isinstance(seed, SeedSpec):
        return SeedSpec(seed.master_seed, Purpose.NOISE, seed.repetition)
    return SeedSpec(seed, Purpose.NOISE)


def _rho_or_zero(gold: np.ndarray, scores: np.ndarray) -> float | None:
    try:
        return spearman_rho(gold, scores)
    except DegenerateInputError:
        return None


def degradation_curve(
    ds: SimilarityDataset,
    table: VectorTable,
    grid: EpsilonGrid = DEFAULT_GRID,
    k: int = 5,
    shape: NoiseShape = NoiseShape.PER_COORDINATE,
    seed: SeedSpec | int = 0,
    *,
    method: str = "kernel",
) -> DegradationCurve:
    """Mean and variance of Spearman's rho at each noise level.

    Only the dataset's own words are perturbed, in order of first
    appearance; sample ``s`` at grid index ``l`` uses the noise stream
    ``(seed.master_seed, NOISE, seed.repetition, l, s)``. Level 0 has no
    noise, so all of its samples equal the clean score.

    ``method="reference"`` computes every sample through
    :func:`perturb_table`, :func:`score_dataset` and :func:`spearman_rho`;
    the default ``"kernel"`` computes the same quantities in compiled code.
    """
    if int(k) != k or k < 1:
        raise InvalidInputError(f"k must be a positive integer, got {k!r}")
    if method not in ("kernel", "reference"):
        raise InvalidInputError(f"unknown method {method!r}")
    shape = NoiseShape(shape)
    seed = _as_seed(seed)
    _check_vocabulary(ds, table)
    vocab = table.subset(ds.words)
    gold = ds.gold

    degenerate = 0
    clean_rho = _rho_or_zero(gold, score_dataset(ds, vocab))
    if clean_rho is None:
        degenerate += k
        clean_rho = 0.0
    points = [CurvePoint(grid.levels[0], clean_rho, 0.0, k)]

    if method == "kernel":
        pos = {w: i for i, w in enumerate(vocab.words)}
        pairs = np.array([(pos[a], pos[b]) for a, b, _ in ds], dtype=np.int64)
        gold_ranks = average_ranks(gold)
        k0, k1 = (np.uint64(x) for x in seed.key)
        shape_code = _kernel.SHAPE_PER_COORDINATE if shape is NoiseShape.PER_COORDINATE else _kernel.SHAPE_BALL

    for level, eps in enumerate(grid.levels[1:], start=1):
        if method == "kernel":
            rhos, bad = _kernel.level_rhos(
                vocab.vectors, pairs, gold_ranks, k0, k1,
                seed.repetition, level, eps, shape_code, 0, int(k),
            )
            n_bad = int(bad.sum())
        else:
            spec = NoiseSpec(eps, shape)
            rhos = np.empty(k)
            n_bad = 0
            for s in range(k):
                noisy = perturb_table(vocab, spec, seed.at(level=level, sample=s))
                try:
                    rho = _rho_or_zero(gold, score_dataset(ds, noisy))
                except DegenerateInputError:
                    rho = None
                if rho is None:
                    n_bad += 1
                    rho = 0.0
                rhos[s] = rho
        degenerate += n_bad
        mean, var = mean_and_variance(rhos)
        points.append(CurvePoint(eps, mean, var, int(k)))

    if degenerate:
        log.warning("%d sample(s) had an undefined correlation and were scored as rho = 0", degenerate)
    return DegradationCurve(
        tuple(points),
        label=ds.label,
        seed=seed.master_seed,
        repetition=seed.repetition,
        shape=shape,
        dimension=table.dimension,
        degenerate_samples=degenerate,
    )


def monotonicity_verdict(curve: DegradationCurve, tolerance: float = 0.0) -> CheckVerdict:
    """Pass iff every step satisfies ``mean[i+1] <= mean[i] + tolerance``."""
    if not tolerance >= 0.0 or not math.isfinite(tolerance):
        raise InvalidInputError(f"tolerance must be finite and >= 0, got {tolerance!r}")
    means = [p.mean_rho for p in curve.points]
    if len(means) < 2:
        raise InvalidInputError("monotonicity needs a curve of at least 2 points")
    for i in range(len(means) - 1):
        if means[i + 1] > means[i] + tolerance:
            return CheckVerdict(False, i + 1, curve, tolerance)
    return CheckVerdict(True, None, curve, tolerance)


def run_check(
    ds: SimilarityDataset,
    table: VectorTable,
    grid: EpsilonGrid = DEFAULT_GRID,
    k: int = 5,
    shape: NoiseShape = NoiseShape.PER_COORDINATE,
    tolerance: float = 0.0,
    seed: SeedSpec | int = 0,
) -> CheckVerdict:
    return monotonicity_verdict(degradation_curve(ds, table, grid, k, shape, seed), tolerance)
