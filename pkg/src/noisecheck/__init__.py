"""Noise-injection sanity check for word-similarity datasets, and a
meta-experiment measuring how stable its verdict is."""

from .errors import (
    DegenerateInputError,
    DuplicatePairError,
    ExperimentError,
    InvalidInputError,
    MissingVocabularyError,
    NoiseCheckError,
    ParseError,
)
from .meta_stability import (
    ExperimentConfig,
    StabilityCell,
    StabilityReport,
    k_sweep_curves,
    stability_experiment,
)
from .sanity_check import (
    DEFAULT_GRID,
    CheckVerdict,
    CurvePoint,
    DegradationCurve,
    EpsilonGrid,
    degradation_curve,
    monotonicity_verdict,
    run_check,
    score_dataset,
)
from .stats_core import average_ranks, mean_and_variance, pearson, roughness, spearman_rho
from .synthetic import PRESETS, SimilarityDataset, SyntheticSpec, WordPair, generate
from .vector_space import (
    NoiseShape,
    NoiseSpec,
    Purpose,
    SeedSpec,
    VectorTable,
    cosine,
    perturb_table,
    sample_noise,
)

__version__ = "0.1.0"
