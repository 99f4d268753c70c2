"""Dense linear algebra used by every other module.

Matrices are plain 2-D ``float64`` numpy arrays in C (row-major) order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class NumericalError(RuntimeError):
    """Raised when a factorization fails to converge."""


def as_matrix(a, name: str = "a") -> np.ndarray:
    """Validate ``a`` as a finite 2-D float64 array and return it (row-major)."""
    a = np.ascontiguousarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains NaN or Inf")
    return a


def as_vector(b, length: int | None = None, name: str = "b") -> np.ndarray:
    b = np.ascontiguousarray(b, dtype=np.float64)
    if b.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got shape {b.shape}")
    if length is not None and b.shape[0] != length:
        raise ValueError(f"{name} has length {b.shape[0]}, expected {length}")
    if not np.all(np.isfinite(b)):
        raise ValueError(f"{name} contains NaN or Inf")
    return b


@dataclass(frozen=True)
class CompactSvd:
    """A = u @ diag(singular_values) @ vt with only the nonzero singular values kept."""

    u: np.ndarray
    singular_values: np.ndarray
    vt: np.ndarray

    @property
    def rank(self) -> int:
        return int(self.singular_values.shape[0])

    def reconstruct(self) -> np.ndarray:
        return (self.u * self.singular_values) @ self.vt


def rank_cutoff(singular_values: np.ndarray, shape: tuple[int, int]) -> float:
    if singular_values.size == 0:
        return 0.0
    return max(shape) * np.finfo(np.float64).eps * float(singular_values[0])


def compact_svd(a) -> CompactSvd:
    a = as_matrix(a)
    if a.size == 0:
        raise ValueError("compact_svd needs a nonempty matrix")
    try:
        u, s, vt = np.linalg.svd(a, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD did not converge: {exc}") from exc
    keep = s > rank_cutoff(s, a.shape)
    if s.size and s[0] == 0.0:
        keep[:] = False
    return CompactSvd(u[:, keep], s[keep], vt[keep, :])


def pseudoinverse(a) -> np.ndarray:
    """Moore-Penrose inverse V diag(1/s) U^T."""
    a = as_matrix(a)
    if a.size == 0:
        return np.zeros((a.shape[1], a.shape[0]))
    svd = compact_svd(a)
    return (svd.vt.T / svd.singular_values) @ svd.u.T


def solve_ridge_exact(a, b, lam: float) -> np.ndarray:
    """argmin ||A x - b||^2 + lam ||x||^2 via (A^T A + lam I)^+ A^T b."""
    a = as_matrix(a)
    b = as_vector(b, a.shape[0])
    if lam < 0:
        raise ValueError("lam must be non-negative")
    gram = a.T @ a
    gram[np.diag_indices_from(gram)] += lam
    return pseudoinverse(gram) @ (a.T @ b)


def solve_ls_exact(a, b) -> np.ndarray:
    return solve_ridge_exact(a, b, 0.0)


def ridge_objective(a, b, x, lam: float) -> float:
    r = a @ x - b
    return float(r @ r + lam * (x @ x))
