"""Similarity datasets and size-matched synthetic instances."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple, Sequence

import numpy as np

from .errors import InvalidInputError
from .vector_space import Purpose, SeedSpec, VectorTable, cosine, draw_uniforms

__all__ = ["WordPair", "SimilarityDataset", "SyntheticSpec", "PRESETS", "generate"]

# Number of pairs in the classic datasets: Miller-Charles, Rubenstein-Goodenough, MEN.
PRESETS = {"mc": 30, "rg": 65, "men": 3000}


class WordPair(NamedTuple):
    word_a: str
    word_b: str
    gold: float


@dataclass(frozen=True)
class SimilarityDataset:
    """Ordered word pairs with gold similarity scores."""

    pairs: tuple[WordPair, ...]
    label: str = field(default="", compare=False)

    def __post_init__(self):
        pairs = tuple(WordPair(str(a), str(b), float(g)) for a, b, g in self.pairs)
        seen: set[frozenset[str]] = set()
        for i, (a, b, g) in enumerate(pairs):
            if not a or not b:
                raise InvalidInputError(f"pair {i}: empty word")
            if a == b:
                raise InvalidInputError(f"pair {i}: word paired with itself ({a!r})")
            if not math.isfinite(g):
                raise InvalidInputError(f"pair {i}: gold score is not finite")
            key = frozenset((a, b))
            if key in seen:
                raise InvalidInputError(f"pair {i}: duplicate pair ({a!r}, {b!r})")
            seen.add(key)
        object.__setattr__(self, "pairs", pairs)

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self) -> Iterator[WordPair]:
        return iter(self.pairs)

    @property
    def gold(self) -> np.ndarray:
        return np.array([p.gold for p in self.pairs], dtype=np.float64)

    @property
    def words(self) -> tuple[str, ...]:
        """Distinct words in order of first appearance."""
        out: dict[str, None] = {}
        for a, b, _ in self.pairs:
            out.setdefault(a)
            out.setdefault(b)
        return tuple(out)


@dataclass(frozen=True)
class SyntheticSpec:
    n_pairs: int
    dimension: int = 100
    seed: SeedSpec | int = 0

    def __post_init__(self):
        if int(self.n_pairs) != self.n_pairs or self.n_pairs < 2:
            raise InvalidInputError(f"n_pairs must be an integer >= 2, got {self.n_pairs!r}")
        if int(self.dimension) != self.dimension or self.dimension < 1:
            raise InvalidInputError(f"dimension must be an integer >= 1, got {self.dimension!r}")
        seed = self.seed
        if not isinstance(seed, SeedSpec):
            seed = SeedSpec(seed, Purpose.DATASET)
        object.__setattr__(self, "seed", seed)


def _word_names(count: int) -> list[str]:
    width = len(str(count - 1))
    return [f"w{i:0{width}d}" for i in range(count)]


def generate(spec: SyntheticSpec) -> tuple[SimilarityDataset, VectorTable]:
    """Synthetic dataset of ``spec.n_pairs`` pairs over ``2 * n_pairs`` words.

    Each word gets an i.i.d. vector uniform on [-1, 1]^d; pair ``i`` is
    words ``2i`` and ``2i + 1``; its gold score is the cosine of the two
    clean vectors, so clean predictions correlate perfectly with gold.
    """
    n, d = spec.n_pairs, spec.dimension
    u = draw_uniforms(spec.seed, 2 * n * d).reshape(2 * n, d)
    words = _word_names(2 * n)
    table = VectorTable(words, 2.0 * u - 1.0)
    vecs = table.vectors
    pairs = [
        WordPair(words[2 * i], words[2 * i + 1], cosine(vecs[2 * i], vecs[2 * i + 1]))
        for i in range(n)
    ]
    return SimilarityDataset(tuple(pairs), label=f"synthetic n={n}"), table


def preset_size(name: str) -> int:
    try:
        return PRESETS[name.lower()]
    except KeyError:
        raise InvalidInputError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None


def dataset_from_rows(rows: Sequence[tuple[str, str, float]], label: str = "") -> SimilarityDataset:
    return SimilarityDataset(tuple(WordPair(*r) for r in rows), label=label)
