"""Implicit Kronecker product K = A0 kron A1 kron ... kron A_{N-1}.

Rows of K are indexed canonically by tuples (i0, ..., i_{N-1}) linearized in
C order (last factor fastest), matching ``tensor.vectorize``.
"""

from __future__ import annotations

from functools import reduce

import numpy as np

from .leverage import ScoreVector, leverage_scores, shrinkage
from .linalg import CompactSvd, as_matrix, compact_svd
from .tensor import multi_mode_product


def _outer_product_rows(blocks: list[np.ndarray]) -> np.ndarray:
    """Row-wise Kronecker product of (s, R_n) blocks -> (s, prod R_n)."""
    out = blocks[0]
    for b in blocks[1:]:
        out = (out[:, :, None] * b[:, None, :]).reshape(out.shape[0], -1)
    return out


class ImplicitKronecker:
    """Kronecker design matrix stored through its factors only.

    Factor SVDs, classical leverage scores and their CDFs are computed once at
    construction; factors are copied and treated as immutable.
    """

    def __init__(self, factors):
        if len(factors) == 0:
            raise ValueError("need at least one factor")
        self.factors = [as_matrix(f, f"factor {n}").copy() for n, f in enumerate(factors)]
        for f in self.factors:
            f.setflags(write=False)
        self.factor_svds: list[CompactSvd] = [_svd_or_empty(f) for f in self.factors]
        self.factor_scores: list[ScoreVector] = [
            leverage_scores(f, svd) for f, svd in zip(self.factors, self.factor_svds)
        ]
        self.factor_cdfs = []
        self._last_live = []
        for sv in self.factor_scores:
            total = sv.scores.sum()
            if total <= 0:
                raise ValueError("factor matrix is identically zero")
            self.factor_cdfs.append(np.cumsum(sv.scores / total))
            self._last_live.append(int(np.flatnonzero(sv.scores)[-1]))
        self.row_dims = tuple(f.shape[0] for f in self.factors)
        self.col_dims = tuple(f.shape[1] for f in self.factors)

    @property
    def order(self) -> int:
        return len(self.factors)

    @property
    def shape(self) -> tuple[int, int]:
        return int(np.prod(self.row_dims)), int(np.prod(self.col_dims))

    @property
    def n(self) -> int:
        return self.shape[0]

    def storage_floats(self) -> int:
        return sum(f.size for f in self.factors) + sum(
            svd.u.size + svd.singular_values.size + svd.vt.size for svd in self.factor_svds
        ) + sum(c.size for c in self.factor_cdfs) + sum(s.scores.size for s in self.factor_scores)

    def unravel(self, linear) -> tuple[np.ndarray, ...]:
        return np.unravel_index(np.asarray(linear), self.row_dims)

    def ravel(self, idx) -> np.ndarray:
        return np.ravel_multi_index(tuple(np.asarray(i) for i in idx), self.row_dims)

    def _check_index(self, idx) -> tuple[int, ...]:
        idx = tuple(int(i) for i in idx)
        if len(idx) != self.order:
            raise IndexError(f"expected {self.order} indices, got {len(idx)}")
        for i, dim in zip(idx, self.row_dims):
            if not 0 <= i < dim:
                raise IndexError(f"row index {idx} out of range for {self.row_dims}")
        return idx

    def row(self, idx) -> np.ndarray:
        idx = self._check_index(idx)
        return reduce(np.kron, (f[i] for f, i in zip(self.factors, idx)))

    def rows(self, linear) -> np.ndarray:
        """Rows for an array of linear row indices, shape (len, prod R_n)."""
        parts = self.unravel(linear)
        return _outer_product_rows([f[p] for f, p in zip(self.factors, parts)])

    def materialize(self) -> np.ndarray:
        return reduce(np.kron, self.factors)

    def factored_leverage_score(self, idx) -> float:
        idx = self._check_index(idx)
        return float(np.prod([s.scores[i] for s, i in zip(self.factor_scores, idx)]))

    def factored_leverage_scores(self, linear=None) -> np.ndarray:
        if linear is None:
            return reduce(np.kron, (s.scores for s in self.factor_scores))
        parts = self.unravel(linear)
        return np.prod([s.scores[p] for s, p in zip(self.factor_scores, parts)], axis=0)

    def ridge_cross_score(self, row_idx, col_row_idx, lam: float) -> float:
        """Cross lam-ridge score between two rows of K from the factor SVDs.

        Sums over rank tuples t of prod sigma^2 / (prod sigma^2 + lam) times
        prod u[i_n, t_n] * prod u[j_n, t_n].
        """
        if lam < 0:
            raise ValueError("lam must be non-negative")
        i = self._check_index(row_idx)
        j = self._check_index(col_row_idx)
        sq = reduce(np.kron, (svd.singular_values**2 for svd in self.factor_svds))
        ui = reduce(np.kron, (svd.u[k] for svd, k in zip(self.factor_svds, i)))
        uj = reduce(np.kron, (svd.u[k] for svd, k in zip(self.factor_svds, j)))
        w = sq / (sq + lam) if lam > 0 else np.ones_like(sq)
        return float(np.sum(w * ui * uj))

    def cross_score_eigenvalues(self, lam: float) -> np.ndarray:
        sv = reduce(np.kron, (svd.singular_values for svd in self.factor_svds))
        return np.sort(shrinkage(sv, lam))[::-1]

    def spectral_norm(self) -> float:
        return float(np.prod([svd.singular_values[0] if svd.rank else 0.0 for svd in self.factor_svds]))

    def transpose_apply(self, t: np.ndarray) -> np.ndarray:
        """K^T vec(t) as a tensor of the core's shape."""
        return multi_mode_product(t.reshape(self.row_dims), self.factors, transpose=True)

    # product leverage distribution, usable as an AugmentedSampler row distribution

    def sample_row_indices(self, rng: np.random.Generator, size: int) -> tuple[np.ndarray, ...]:
        return tuple(
            np.minimum(np.searchsorted(cdf, rng.random(size) * cdf[-1], side="right"), last)
            for cdf, last in zip(self.factor_cdfs, self._last_live)
        )

    def sample_row_index(self, rng: np.random.Generator) -> tuple[tuple[int, ...], float]:
        parts = self.sample_row_indices(rng, 1)
        idx = tuple(int(p[0]) for p in parts)
        return idx, float(self.prob(self.ravel(idx)))

    def locate(self, fractions, rng):
        # product draw: one binary search per factor with fresh uniforms
        return self.ravel(self.sample_row_indices(rng, len(fractions))).astype(np.int64)

    def prob(self, linear) -> np.ndarray:
        parts = self.unravel(linear)
        p = np.ones(np.shape(linear))
        for sv, part in zip(self.factor_scores, parts):
            p = p * sv.scores[part] / sv.scores.sum()
        return p


def _svd_or_empty(a: np.ndarray) -> CompactSvd:
    if not np.any(a):
        return CompactSvd(np.zeros((a.shape[0], 0)), np.zeros(0), np.zeros((0, a.shape[1])))
    return compact_svd(a)
