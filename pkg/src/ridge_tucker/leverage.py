"""Classical and ridge leverage scores, cross scores and effective dimension."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import CompactSvd, as_matrix, compact_svd

CROSS_SCORE_ROW_CAP = 10_000


@dataclass(frozen=True)
class ScoreVector:
    scores: np.ndarray
    lam: float = 0.0

    def __post_init__(self):
        scores = np.asarray(self.scores, dtype=np.float64)
        if scores.ndim != 1:
            raise ValueError("scores must be 1-D")
        if not np.all(np.isfinite(scores)) or np.any(scores < 0):
            raise ValueError("scores must be finite and non-negative")
        if self.lam < 0:
            raise ValueError("lam must be non-negative")
        object.__setattr__(self, "scores", scores)

    @property
    def source_rows(self) -> int:
        return int(self.scores.shape[0])

    def __len__(self) -> int:
        return self.source_rows


@dataclass(frozen=True)
class CrossScoreMatrix:
    l: np.ndarray
    lam: float = 0.0

    @property
    def diagonal(self) -> np.ndarray:
        return np.diag(self.l).copy()


def shrinkage(singular_values: np.ndarray, lam: float) -> np.ndarray:
    """sigma^2 / (sigma^2 + lam); all ones when lam = 0."""
    s2 = singular_values**2
    return s2 / (s2 + lam)


def _svd(a, svd: CompactSvd | None) -> CompactSvd:
    if svd is not None:
        return svd
    a = as_matrix(a)
    if not np.any(a):
        return CompactSvd(np.zeros((a.shape[0], 0)), np.zeros(0), np.zeros((0, a.shape[1])))
    return compact_svd(a)


def ridge_scores(a, lam: float = 0.0, svd: CompactSvd | None = None) -> ScoreVector:
    """Row scores a_i (A^T A + lam I)^+ a_i^T, evaluated through the compact SVD."""
    if lam < 0:
        raise ValueError("lam must be non-negative")
    svd = _svd(a, svd)
    scores = (svd.u**2) @ shrinkage(svd.singular_values, lam)
    return ScoreVector(np.clip(scores, 0.0, 1.0), lam)


def leverage_scores(a, svd: CompactSvd | None = None) -> ScoreVector:
    return ridge_scores(a, 0.0, svd)


def cross_scores(a, lam: float = 0.0, cap: int = CROSS_SCORE_ROW_CAP) -> CrossScoreMatrix:
    a = as_matrix(a)
    if a.shape[0] > cap:
        raise ValueError(f"{a.shape[0]} rows exceeds the cross-score cap of {cap}")
    if lam < 0:
        raise ValueError("lam must be non-negative")
    svd = _svd(a, None)
    w = shrinkage(svd.singular_values, lam)
    l = (svd.u * w) @ svd.u.T
    return CrossScoreMatrix(0.5 * (l + l.T), lam)


def effective_dimension(scores: ScoreVector) -> float:
    return float(np.sum(scores.scores))


def check_beta_overestimate(candidate, exact) -> float:
    """Largest beta for which ``candidate`` is a beta-overestimate of ``exact``.

    Rows where the exact score is zero impose no constraint and are skipped.
    """
    cand = np.asarray(getattr(candidate, "scores", candidate), dtype=np.float64)
    ex = np.asarray(getattr(exact, "scores", exact), dtype=np.float64)
    if cand.shape != ex.shape:
        raise ValueError(f"length mismatch: {cand.shape} vs {ex.shape}")
    cand_total = cand.sum()
    d_eff = ex.sum()
    if cand_total <= 0 or d_eff <= 0:
        raise ValueError("scores must have positive mass")
    live = ex > 0
    ratios = (cand[live] / cand_total) / (ex[live] / d_eff)
    return float(ratios.min())
