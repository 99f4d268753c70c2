"""Ridge leverage scores after removing rows from the design matrix.

Only the principal cross-score block on the removed rows and the cross-score
slices between kept and removed rows are formed; the full n x n matrix is
never built.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kronecker import ImplicitKronecker
from .leverage import ScoreVector, ridge_scores, shrinkage
from .linalg import CompactSvd, as_matrix, compact_svd


@dataclass(frozen=True)
class RowRemovalContext:
    original: np.ndarray
    kept: np.ndarray
    removed: np.ndarray
    lam: float
    svd: CompactSvd

    @classmethod
    def build(cls, a, removed, lam: float) -> "RowRemovalContext":
        a = as_matrix(a)
        if lam <= 0:
            raise ValueError("row-removal formulas need lam > 0; recompute scores directly for lam = 0")
        n = a.shape[0]
        removed = np.unique(np.asarray(removed, dtype=np.int64))
        if removed.size and (removed[0] < 0 or removed[-1] >= n):
            raise IndexError("removed row index out of range")
        kept = np.setdiff1d(np.arange(n), removed)
        if kept.size == 0:
            raise ValueError("cannot remove every row")
        return cls(a, kept, removed, lam, compact_svd(a))

    def cross_block(self, rows, cols) -> np.ndarray:
        u = self.svd.u
        w = shrinkage(self.svd.singular_values, self.lam)
        return (u[rows] * w) @ u[cols].T

    def original_scores(self) -> np.ndarray:
        return ridge_scores(self.original, self.lam, self.svd).scores


def exact_scores_after_removal(ctx: RowRemovalContext) -> ScoreVector:
    """Scores of the kept rows in the reduced matrix via the Woodbury identity.

    l_i(A_kept) = l_i(A) + v_i^T (I - L_rr)^{-1} v_i with v_i the cross scores
    between row i and the removed rows.
    """
    base = ctx.original_scores()[ctx.kept]
    if ctx.removed.size == 0:
        return ScoreVector(base, ctx.lam)
    l_rr = ctx.cross_block(ctx.removed, ctx.removed)
    v = ctx.cross_block(ctx.kept, ctx.removed)
    m = np.eye(ctx.removed.size) - l_rr
    correction = np.einsum("ij,ij->i", v, np.linalg.solve(m, v.T).T)
    return ScoreVector(base + correction, ctx.lam)


def removed_block_max_eigenvalue(ctx: RowRemovalContext) -> float:
    if ctx.removed.size == 0:
        return 0.0
    return float(np.linalg.eigvalsh(ctx.cross_block(ctx.removed, ctx.removed))[-1])


def score_upper_bound_after_removal(ctx: RowRemovalContext) -> ScoreVector:
    """l_i(A) + sum_{j removed} l_ij(A)^2 / (1 - lambda_max(L_rr))."""
    base = ctx.original_scores()[ctx.kept]
    if ctx.removed.size == 0:
        return ScoreVector(base, ctx.lam)
    v = ctx.cross_block(ctx.kept, ctx.removed)
    coeff = 1.0 / (1.0 - removed_block_max_eigenvalue(ctx))
    return ScoreVector(base + coeff * np.sum(v**2, axis=1), ctx.lam)


def sum_squared_cross_bound(a, lam: float, i: int) -> float:
    """sum_j l_ij(A)^2, which never exceeds l_i(A)."""
    a = as_matrix(a)
    if not 0 <= i < a.shape[0]:
        raise IndexError(f"row {i} out of range")
    if not np.any(a):
        return 0.0
    svd = compact_svd(a)
    w = shrinkage(svd.singular_values, lam)
    row = (svd.u[i] * w) @ svd.u.T
    return float(row @ row)


def kronecker_removal_coefficient(k: ImplicitKronecker, lam: float) -> float:
    """1 + prod ||A_n||_2^2 / lam, bounding 1 / (1 - lambda_max(L_rr)) for any removal set."""
    if lam <= 0:
        raise ValueError("lam must be positive")
    return 1.0 + k.spectral_norm() ** 2 / lam
