"""Augmented sampling distribution over the n data rows plus d regularizer rows.

Indices are 0-based: ``0..n-1`` are data rows and ``n..n+d-1`` are the
sqrt(lam) * I rows of the augmented design.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Protocol

import numpy as np


def make_rng(seed) -> np.random.Generator:
    """Seeded PCG64 generator; a Generator passed in is returned unchanged."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(seed))


class RowDistribution(Protocol):
    """A distribution over data rows that the augmented sampler can branch into."""

    n: int

    def locate(self, fractions: np.ndarray, rng: np.random.Generator) -> np.ndarray: ...

    def prob(self, idx: np.ndarray) -> np.ndarray: ...


class PrefixSumDistribution:
    """Explicit score vector with a prefix-sum table; each draw is one binary search."""

    def __init__(self, scores):
        scores = np.asarray(scores, dtype=np.float64)
        if scores.ndim != 1 or scores.size == 0:
            raise ValueError("scores must be a nonempty 1-D vector")
        if not np.all(np.isfinite(scores)) or np.any(scores < 0):
            raise ValueError("scores must be finite and non-negative")
        total = scores.sum()
        if total <= 0:
            raise ValueError("scores are all zero")
        self.n = scores.size
        self.probabilities = scores / total
        self.cumulative = np.cumsum(self.probabilities)

    def locate(self, fractions, rng=None):
        # fractions are uniform on [0, 1); the last live row absorbs round-off
        idx = np.searchsorted(self.cumulative, fractions * self.cumulative[-1], side="right")
        last_live = int(np.flatnonzero(self.probabilities)[-1])
        return np.minimum(idx, last_live)

    def prob(self, idx):
        return self.probabilities[idx]


@dataclass
class AugmentedSampler:
    """Data row i has mass d * q_i, each regularizer row has mass min{1, d - d_eff_lower}.

    ``q`` is the normalized candidate distribution, so the data rows carry
    total mass d after normalization.
    """

    rows: RowDistribution
    n: int
    d: int
    aug_mass_per_row: float
    rng: np.random.Generator = field(default_factory=lambda: make_rng(None))

    @property
    def data_mass(self) -> float:
        return float(self.d)

    @property
    def total_mass(self) -> float:
        return self.data_mass + self.d * self.aug_mass_per_row

    @property
    def normalized_scores(self) -> np.ndarray:
        return self.d * self.rows.prob(np.arange(self.n))

    def prob(self, idx) -> np.ndarray:
        idx = np.asarray(idx)
        out = np.empty(idx.shape, dtype=np.float64)
        data = idx < self.n
        out[data] = self.data_mass * self.rows.prob(idx[data]) / self.total_mass
        out[~data] = self.aug_mass_per_row / self.total_mass
        return out

    def probabilities(self) -> np.ndarray:
        """Full probability vector over [n + d]; only for small n."""
        return self.prob(np.arange(self.n + self.d))


def build_augmented(candidate_scores, n: int, d: int, d_eff_lower: float = 0.0, seed=None) -> AugmentedSampler:
    rows = candidate_scores if hasattr(candidate_scores, "locate") else PrefixSumDistribution(
        getattr(candidate_scores, "scores", candidate_scores)
    )
    if rows.n != n:
        raise ValueError(f"candidate covers {rows.n} rows, expected {n}")
    if d < 1:
        raise ValueError("d must be positive")
    if not 0.0 <= d_eff_lower <= d:
        raise ValueError(f"d_eff_lower={d_eff_lower} outside [0, {d}]")
    return AugmentedSampler(rows, n, d, min(1.0, d - d_eff_lower), make_rng(seed))


def draw_many(sampler: AugmentedSampler, size: int) -> tuple[np.ndarray, np.ndarray]:
    """Draw ``size`` indices in [n + d] and their probabilities.

    One uniform per draw picks the branch by inverse CDF over the total mass
    and, for prefix-sum rows, also locates the row. Product distributions
    draw their own per-factor uniforms.
    """
    u = sampler.rng.random(size) * sampler.total_mass
    idx = np.empty(size, dtype=np.int64)
    data = u < sampler.data_mass
    idx[data] = sampler.rows.locate(u[data] / sampler.data_mass, sampler.rng)
    if sampler.aug_mass_per_row > 0:
        k = ((u[~data] - sampler.data_mass) // sampler.aug_mass_per_row).astype(np.int64)
        idx[~data] = sampler.n + np.minimum(k, sampler.d - 1)
    return idx, sampler.prob(idx)


def draw(sampler: AugmentedSampler) -> tuple[int, float]:
    idx, p = draw_many(sampler, 1)
    return int(idx[0]), float(p[0])


def beta_prime(beta: float, l1_norm: float, d: int, d_eff: float, d_eff_lower: float) -> float:
    """Overestimate factor of the augmented distribution for the augmented design's leverage scores."""
    if beta <= 0 or l1_norm <= 0:
        raise ValueError("beta and l1_norm must be positive")
    if not 0 < d_eff <= d:
        raise ValueError(f"d_eff={d_eff} outside (0, {d}]")
    if not 0 <= d_eff_lower <= d:
        raise ValueError(f"d_eff_lower={d_eff_lower} outside [0, {d}]")
    m = min(1.0, d - d_eff_lower)
    data_side = beta * d / d_eff / (1.0 + d * m / l1_norm)
    aug_side = 1.0 / (l1_norm / d + m)
    return min(data_side, aug_side)


def conservative_beta_prime(beta: float, d: int, d_eff_lower: float) -> float:
    if beta <= 0:
        raise ValueError("beta must be positive")
    return min(beta, 1.0) / (1.0 + min(1.0, d - d_eff_lower))

