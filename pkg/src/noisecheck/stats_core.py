"""Rank and summary statistics.

Everything here is plain 64-bit floating point without compensated
summation. That is accurate to well below 1e-12 at the sizes this package
works with (sequences of at most a few thousand scores, at most a few
hundred samples per noise level).
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .errors import DegenerateInputError, InvalidInputError

__all__ = [
    "average_ranks",
    "pearson",
    "spearman_rho",
    "mean_and_variance",
    "roughness",
]


def _as_finite(xs: Sequence[float] | np.ndarray, name: str = "xs") -> np.ndarray:
    try:
        arr = np.asarray(xs, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise InvalidInputError(f"{name}: not a sequence of reals") from exc
    if arr.ndim != 1:
        raise InvalidInputError(f"{name}: expected a 1-D sequence, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name}: contains NaN or infinity")
    return arr


def _pair(xs, ys) -> tuple[np.ndarray, np.ndarray]:
    x = _as_finite(xs, "xs")
    y = _as_finite(ys, "ys")
    if x.shape != y.shape:
        raise InvalidInputError(f"length mismatch: {x.size} vs {y.size}")
    if x.size < 2:
        raise InvalidInputError("correlation needs at least 2 points")
    return x, y


def average_ranks(xs: Sequence[float] | np.ndarray) -> np.ndarray:
    """1-based ranks under ascending order; tied values share the mean of
    the positions they occupy.

    >>> average_ranks([1.0, 2.0, 2.0, 3.0]).tolist()
    [1.0, 2.5, 2.5, 4.0]
    """
    x = _as_finite(xs)
    n = x.size
    if n == 0:
        raise InvalidInputError("average_ranks needs at least one value")
    order = np.argsort(x, kind="mergesort")
    sx = x[order]
    starts = np.flatnonzero(np.r_[True, sx[1:] != sx[:-1]])
    ends = np.r_[starts[1:], n]
    # positions start+1 .. end, whose mean is (start + 1 + end) / 2
    group_rank = (starts + ends + 1) / 2.0
    ranks = np.empty(n, dtype=np.float64)
    ranks[order] = np.repeat(group_rank, ends - starts)
    return ranks


def pearson(xs, ys) -> float:
    """Sample Pearson correlation.

    Raises DegenerateInputError if either sequence is constant.
    """
    x, y = _pair(xs, ys)
    if np.all(x == x[0]) or np.all(y == y[0]):
        raise DegenerateInputError("Pearson correlation undefined for a constant sequence")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    sxy = float(dx @ dy)
    # sqrt of the product (not product of sqrts) so that xs == ys gives exactly 1.0
    r = sxy / math.sqrt(sxx * syy)
    return min(1.0, max(-1.0, r))


def spearman_rho(xs, ys) -> float:
    """Spearman's rank correlation: Pearson correlation of average ranks."""
    x, y = _pair(xs, ys)
    return pearson(average_ranks(x), average_ranks(y))


def mean_and_variance(xs) -> tuple[float, float]:
    """Arithmetic mean and unbiased (n - 1) sample variance.

    A single value has variance 0 by convention.
    """
    x = _as_finite(xs)
    if x.size == 0:
        raise InvalidInputError("mean_and_variance needs at least one value")
    if np.all(x == x[0]):
        return float(x[0]), 0.0
    mean = float(x.mean())
    d = x - mean
    return mean, float(d @ d) / (x.size - 1)


def roughness(curve_means) -> float:
    """Mean absolute difference of successive points of a curve."""
    x = _as_finite(curve_means, "curve_means")
    if x.size < 2:
        raise InvalidInputError("roughness needs at least 2 points")
    return float(np.mean(np.abs(np.diff(x))))
