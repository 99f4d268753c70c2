"""Sketched ridge regression by sampling rows of the augmented system.

Ridge regression min ||A x - b||^2 + lam ||x||^2 is ordinary least squares on

    A_bar = [A; sqrt(lam) I_d],   b_bar = [b; 0].

Rows of A_bar are sampled from an augmented distribution built on a
beta-overestimate of the ridge leverage scores, reweighted by
1 / sqrt(P(j) s), and the small sketched least-squares problem is solved.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import as_matrix, as_vector, compact_svd, solve_ls_exact
from .sampler import AugmentedSampler, build_augmented, conservative_beta_prime, draw_many


@dataclass(frozen=True)
class SketchConfig:
    epsilon: float = 0.1
    delta: float = 0.1
    lam: float = 0.0
    sample_count_override: int | None = None
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise ValueError("epsilon must lie in (0, 1)")
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        if self.lam < 0:
            raise ValueError("lam must be non-negative")
        if self.sample_count_override is not None and self.sample_count_override < 1:
            raise ValueError("sample_count_override must be at least 1")


@dataclass(frozen=True)
class RowSketch:
    """Sketch S in factored form: row k of S has ``weights[k]`` at column ``sampled_indices[k]``."""

    sampled_indices: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        if self.sampled_indices.shape != self.weights.shape or self.weights.size < 1:
            raise ValueError("sketch needs at least one row and matching weights")
        if not np.all(np.isfinite(self.weights)) or np.any(self.weights <= 0):
            raise ValueError("sketch weights must be positive and finite")

    @property
    def s(self) -> int:
        return int(self.weights.size)

    def compressed(self) -> tuple[np.ndarray, np.ndarray]:
        """Distinct indices and row scales with sum of squared weights preserved.

        Stacking scale_k * row(idx_k) gives a matrix M with M^T M and M^T y
        identical to those of the full s-row sketch, so least-squares
        solutions agree.
        """
        idx, inverse = np.unique(self.sampled_indices, return_inverse=True)
        sq = np.bincount(inverse, weights=self.weights**2, minlength=idx.size)
        return idx, np.sqrt(sq)


@dataclass
class SketchResult:
    x: np.ndarray
    s: int
    beta_prime: float
    sketched_objective: float
    rank_deficient: bool
    sketch: RowSketch


def sample_count(beta_prime: float, d: int, epsilon: float, delta: float) -> int:
    """ceil(4d / beta' * max{420 ln(4d / delta), 1 / (delta eps)})."""
    if beta_prime <= 0 or d < 1 or not 0 < epsilon < 1 or not 0 < delta < 1:
        raise ValueError("invalid sample_count arguments")
    return math.ceil(4 * d / beta_prime * max(420 * math.log(4 * d / delta), 1 / (delta * epsilon)))


def sample_sketch(sampler: AugmentedSampler, s: int) -> RowSketch:
    idx, p = draw_many(sampler, s)
    return RowSketch(idx, 1.0 / np.sqrt(p * s))


def augmented_rows(a, idx: np.ndarray, lam: float) -> np.ndarray:
    """Rows ``idx`` of [A; sqrt(lam) I]; ``a`` may be dense or expose ``rows``/``shape``."""
    n, d = a.shape
    idx = np.asarray(idx)
    out = np.zeros((idx.size, d))
    data = idx < n
    if np.any(data):
        out[data] = a.rows(idx[data]) if hasattr(a, "rows") else a[idx[data]]
    aug = np.flatnonzero(~data)
    out[aug, idx[aug] - n] = np.sqrt(lam)
    return out


def augmented_rhs(b: np.ndarray, idx: np.ndarray) -> np.ndarray:
    idx = np.asarray(idx)
    n = b.shape[0]
    out = np.zeros(idx.size)
    data = idx < n
    out[data] = b[idx[data]]
    return out


def sketch_system(a, b, sketch: RowSketch, lam: float, compress: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """(S A_bar, S b_bar), optionally with duplicate sketch rows merged."""
    if compress:
        idx, scale = sketch.compressed()
    else:
        idx, scale = sketch.sampled_indices, sketch.weights
    return scale[:, None] * augmented_rows(a, idx, lam), scale * augmented_rhs(b, idx)


def approximate_ridge_regression(
    a,
    b,
    candidate_scores,
    config: SketchConfig,
    d_eff_lower: float = 0.0,
    beta: float = 1.0,
) -> SketchResult:
    """Sketched ridge solve with a (1 + eps) objective guarantee w.p. 1 - delta.

    ``a`` is a dense matrix or an implicit operator with ``shape`` and
    ``rows(indices)``. ``candidate_scores`` is a beta-overestimate of the
    ridge leverage scores (vector, ScoreVector, or a row distribution with
    ``locate``/``prob``). ``beta`` defaults to 1, which is valid for the
    classical leverage scores of ``a``.
    """
    if not hasattr(a, "rows"):
        a = as_matrix(a)
    n, d = a.shape
    b = as_vector(b, n)
    sampler = build_augmented(candidate_scores, n, d, d_eff_lower, seed=config.seed)
    bp = conservative_beta_prime(beta, d, d_eff_lower)
    s = config.sample_count_override or sample_count(bp, d, config.epsilon, config.delta)
    sketch = sample_sketch(sampler, s)
    sa, sb = sketch_system(a, b, sketch, config.lam)
    x = solve_ls_exact(sa, sb)
    rank = compact_svd(sa.T @ sa).rank if np.any(sa) else 0
    r = sa @ x - sb
    return SketchResult(x, s, bp, float(r @ r), rank < d, sketch)


@dataclass(frozen=True)
class StructuralConditions:
    cond1: float
    cond2: float
    holds: bool


def verify_structural_conditions(a, b, sketch: RowSketch, lam: float, epsilon: float) -> StructuralConditions:
    """sigma_min^2(S U) and ||U^T S^T S b_perp||^2 / R^2 for the augmented system.

    The sketched solution is (1 + eps)-optimal whenever cond1 >= 1/sqrt(2)
    and cond2 <= eps / 2.
    """
    a = as_matrix(a)
    n, d = a.shape
    b = as_vector(b, n)
    a_bar = np.vstack([a, np.sqrt(lam) * np.eye(d)])
    b_bar = np.concatenate([b, np.zeros(d)])
    u = compact_svd(a_bar).u
    b_perp = b_bar - u @ (u.T @ b_bar)
    resid2 = float(b_perp @ b_perp)

    idx, scale = sketch.compressed()
    su = scale[:, None] * u[idx]
    sv = np.linalg.svd(su, compute_uv=False)
    cond1 = float(sv[-1] ** 2) if sv.size == u.shape[1] else 0.0

    if resid2 <= 1e-24 * max(1.0, float(b_bar @ b_bar)):
        cond2 = 0.0
    else:
        prod = su.T @ (scale * b_perp[idx])
        cond2 = float(prod @ prod) / resid2
    return StructuralConditions(cond1, cond2, cond1 >= 1 / np.sqrt(2) and cond2 <= epsilon / 2)
