"""Word vectors, cosine similarity, and seeded noise injection.

Random streams
--------------
All randomness comes from the Philox4x64-10 counter-based generator, as
implemented by ``numpy.random.Philox``. A stream is addressed by a
:class:`SeedSpec`:

* the 128-bit Philox key is ``(H(master, purpose, 0), H(master, purpose, 1))``
  where ``H`` chains the SplitMix64 finalizer over its 64-bit arguments
  (see :func:`hash_words`);
* the 256-bit Philox counter is ``(block, sample, level, repetition)``;
  block ``b`` of a stream is the Philox output at counter word 0 = ``b + 1``.

Each counter value yields four 64-bit words, consumed in order. A word
``r`` becomes a uniform double in [0, 1) as ``(r >> 11) * 2**-53``.
Because every (repetition, level, sample) triple owns its own counter
range, streams never overlap and can be produced in any order, on any
number of workers, with identical results.

Noise layout
------------
Within one stream, word ``w`` of a table (in table order) consumes the
uniforms ``[w * stride, (w + 1) * stride)``. For per-coordinate noise
``stride = d`` and coordinate ``i`` is ``eps * (2 u_i - 1)``. For
ball-uniform noise ``stride = 2 * ceil(d / 2) + 1``: Box-Muller pairs give
a Gaussian direction and the last uniform gives the radius
``eps * u ** (1 / d)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import DegenerateInputError, InvalidInputError

__all__ = [
    "VectorTable",
    "NoiseShape",
    "NoiseSpec",
    "Purpose",
    "SeedSpec",
    "splitmix64",
    "hash_words",
    "draw_uniforms",
    "noise_stride",
    "noise_matrix",
    "cosine",
    "sample_noise",
    "perturb_table",
]

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
_UNIT = 1.0 / (1 << 53)


def _check_word(word: str) -> None:
    if not isinstance(word, str) or not word or any(c.isspace() for c in word):
        raise InvalidInputError(f"invalid word {word!r}: must be a non-empty string without whitespace")


class VectorTable:
    """Immutable mapping from word to a fixed-dimension real vector.

    Vectors are stored row-wise in a read-only ``(len(words), dimension)``
    float64 array; row order is the table order used for noise streams.
    """

    __slots__ = ("_words", "_vectors", "_index")

    def __init__(self, words: Sequence[str], vectors):
        words = tuple(words)
        mat = np.array(vectors, dtype=np.float64, copy=True, order="C")
        if mat.ndim != 2:
            raise InvalidInputError(f"vectors must be 2-D, got shape {mat.shape}")
        if mat.shape[0] != len(words):
            raise InvalidInputError(f"{len(words)} words but {mat.shape[0]} vectors")
        if mat.shape[1] < 1:
            raise InvalidInputError("dimension must be at least 1")
        if not np.all(np.isfinite(mat)):
            raise InvalidInputError("vectors contain NaN or infinity")
        index: dict[str, int] = {}
        for i, w in enumerate(words):
            _check_word(w)
            if w in index:
                raise InvalidInputError(f"duplicate word {w!r}")
            index[w] = i
        mat.flags.writeable = False
        self._words = words
        self._vectors = mat
        self._index = index

    @classmethod
    def from_mapping(cls, entries: Mapping[str, Sequence[float]]) -> "VectorTable":
        words = list(entries)
        if not words:
            raise InvalidInputError("cannot infer dimension of an empty mapping")
        return cls(words, [entries[w] for w in words])

    @property
    def words(self) -> tuple[str, ...]:
        return self._words

    @property
    def vectors(self) -> np.ndarray:
        return self._vectors

    @property
    def dimension(self) -> int:
        return self._vectors.shape[1]

    def __len__(self) -> int:
        return len(self._words)

    def __contains__(self, word: object) -> bool:
        return word in self._index

    def __iter__(self) -> Iterator[str]:
        return iter(self._words)

    def __getitem__(self, word: str) -> np.ndarray:
        return self._vectors[self._index[word]]

    def index(self, word: str) -> int:
        return self._index[word]

    def subset(self, words: Iterable[str]) -> "VectorTable":
        """Table restricted to ``words``, in the given order."""
        words = list(words)
        rows = [self._index[w] for w in words]
        return VectorTable(words, self._vectors[rows])

    def with_vectors(self, vectors) -> "VectorTable":
        return VectorTable(self._words, vectors)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, VectorTable):
            return NotImplemented
        return self._words == other._words and np.array_equal(self._vectors, other._vectors)

    def __repr__(self) -> str:
        return f"VectorTable({len(self)} words, dimension={self.dimension})"


class NoiseShape(str, enum.Enum):
    PER_COORDINATE = "per-coordinate-uniform"
    BALL = "ball-uniform"


@dataclass(frozen=True)
class NoiseSpec:
    """Noise of maximum magnitude ``epsilon``.

    Per-coordinate: every coordinate uniform on [-epsilon, epsilon].
    Ball: uniform over the d-ball of radius epsilon.
    """

    epsilon: float
    shape: NoiseShape = NoiseShape.PER_COORDINATE

    def __post_init__(self):
        eps = float(self.epsilon)
        if not math.isfinite(eps) or eps < 0:
            raise InvalidInputError(f"epsilon must be finite and >= 0, got {self.epsilon!r}")
        object.__setattr__(self, "epsilon", eps)
        object.__setattr__(self, "shape", NoiseShape(self.shape))


class Purpose(enum.IntEnum):
    DATASET = 1
    NOISE = 2
    EXPERIMENT = 3


def splitmix64(x: int) -> int:
    """One SplitMix64 step: add the golden gamma, then apply the finalizer."""
    z = (x + GOLDEN_GAMMA) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def hash_words(*words: int) -> int:
    """Fold 64-bit integers into one 64-bit hash, order-sensitively."""
    h = 0
    for w in words:
        if w < 0:
            raise InvalidInputError("hash inputs must be non-negative")
        h = splitmix64(h ^ (int(w) & MASK64))
    return h


@dataclass(frozen=True)
class SeedSpec:
    """Address of one random stream: a master seed plus labels."""

    master_seed: int
    purpose: Purpose = Purpose.NOISE
    repetition: int = 0
    level: int = 0
    sample: int = 0

    def __post_init__(self):
        for name in ("master_seed", "repetition", "level", "sample"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or isinstance(v, bool) or not 0 <= v <= MASK64:
                raise InvalidInputError(f"{name} must be an integer in [0, 2**64), got {v!r}")
            object.__setattr__(self, name, int(v))
        object.__setattr__(self, "purpose", Purpose(self.purpose))

    @property
    def key(self) -> tuple[int, int]:
        p = int(self.purpose)
        return hash_words(self.master_seed, p, 0), hash_words(self.master_seed, p, 1)

    @property
    def counter(self) -> tuple[int, int, int]:
        """Counter words 1..3; word 0 is the block index."""
        return self.sample, self.level, self.repetition

    def at(self, *, level: int | None = None, sample: int | None = None,
           repetition: int | None = None) -> "SeedSpec":
        return SeedSpec(
            self.master_seed,
            self.purpose,
            self.repetition if repetition is None else repetition,
            self.level if level is None else level,
            self.sample if sample is None else sample,
        )


def draw_uniforms(stream: SeedSpec, count: int) -> np.ndarray:
    """The first ``count`` uniforms in [0, 1) of ``stream``."""
    if count < 0:
        raise InvalidInputError("count must be >= 0")
    blocks = -(-count // 4)
    bitgen = np.random.Philox(
        key=np.array(stream.key, dtype=np.uint64),
        counter=np.array((0, *stream.counter), dtype=np.uint64),
    )
    raw = bitgen.random_raw(4 * blocks)[:count]
    return (raw >> np.uint64(11)).astype(np.float64) * _UNIT


def noise_stride(d: int, shape: NoiseShape) -> int:
    """Number of uniforms consumed per noise vector."""
    if NoiseShape(shape) is NoiseShape.PER_COORDINATE:
        return d
    return 2 * (-(-d // 2)) + 1


def noise_matrix(n_vectors: int, d: int, spec: NoiseSpec, stream: SeedSpec) -> np.ndarray:
    """``n_vectors`` noise vectors of dimension ``d`` drawn from ``stream``."""
    if d < 1:
        raise InvalidInputError("dimension must be >= 1")
    if n_vectors < 0:
        raise InvalidInputError("n_vectors must be >= 0")
    eps = spec.epsilon
    if eps == 0.0:
        return np.zeros((n_vectors, d))
    stride = noise_stride(d, spec.shape)
    u = draw_uniforms(stream, n_vectors * stride).reshape(n_vectors, stride)
    if spec.shape is NoiseShape.PER_COORDINATE:
        return eps * (2.0 * u - 1.0)
    half = (stride - 1) // 2
    r = np.sqrt(-2.0 * np.log1p(-u[:, 0:2 * half:2]))
    theta = 2.0 * math.pi * u[:, 1:2 * half:2]
    z = np.empty((n_vectors, 2 * half))
    z[:, 0::2] = r * np.cos(theta)
    z[:, 1::2] = r * np.sin(theta)
    z = z[:, :d]
    norms = np.sqrt(np.einsum("ij,ij->i", z, z))
    radius = eps * u[:, -1] ** (1.0 / d)
    out = np.zeros_like(z)
    ok = norms > 0.0
    out[ok] = z[ok] * (radius[ok] / norms[ok])[:, None]
    return out


def cosine(u, v) -> float:
    """Cosine similarity, clamped to [-1, 1].

    Sums use ``math.fsum`` so the result does not depend on BLAS or SIMD
    summation order.
    """
    a = np.asarray(u, dtype=np.float64)
    b = np.asarray(v, dtype=np.float64)
    if a.ndim != 1 or a.shape != b.shape:
        raise InvalidInputError(f"dimension mismatch: {a.shape} vs {b.shape}")
    if a.size == 0:
        raise InvalidInputError("vectors must have dimension >= 1")
    uu = math.fsum(a * a)
    vv = math.fsum(b * b)
    if uu == 0.0 or vv == 0.0:
        raise DegenerateInputError("cosine undefined for a zero vector")
    # sqrt of the product so that cosine(u, u) is exactly 1.0
    c = math.fsum(a * b) / math.sqrt(uu * vv)
    return min(1.0, max(-1.0, c))


def sample_noise(d: int, spec: NoiseSpec, stream: SeedSpec) -> np.ndarray:
    """One noise vector: the first vector of ``stream``'s layout."""
    return noise_matrix(1, d, spec, stream)[0]


def perturb_table(table: VectorTable, spec: NoiseSpec, stream: SeedSpec) -> VectorTable:
    """New table with one fresh noise vector added to every word's vector."""
    if spec.epsilon == 0.0:
        return table
    noise = noise_matrix(len(table), table.dimension, spec, stream)
    return table.with_vectors(table.vectors + noise)
