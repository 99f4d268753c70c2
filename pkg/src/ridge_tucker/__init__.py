"""Regularized Tucker ALS with ridge-leverage-score sketched core updates."""

from .als import AlsConfig, AlsResult, TuckerModel, als, tucker_loss, update_core_exact, update_core_fast, update_factor
from .kronecker import ImplicitKronecker
from .leverage import (
    CrossScoreMatrix,
    ScoreVector,
    check_beta_overestimate,
    cross_scores,
    effective_dimension,
    leverage_scores,
    ridge_scores,
)
from .linalg import CompactSvd, NumericalError, compact_svd, pseudoinverse, solve_ls_exact, solve_ridge_exact
from .sampler import AugmentedSampler, beta_prime, build_augmented, conservative_beta_prime, draw, draw_many
from .sketch import (
    RowSketch,
    SketchConfig,
    SketchResult,
    approximate_ridge_regression,
    sample_count,
    verify_structural_conditions,
)

__version__ = "0.1.0"
