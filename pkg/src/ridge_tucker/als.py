"""Regularized Tucker decomposition by alternating least squares.

The loss is ||X - G x_0 A0 ... x_{N-1} A_{N-1}||_F^2 + lam (||G||_F^2 + sum ||A_n||_F^2).
Each sweep updates the factors in mode order and then the core. The core
update is either the exact ridge solve or the leverage-score sketched solve.
"""

from __future__ import annotations

import dataclasses
import logging
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .kronecker import ImplicitKronecker
from .linalg import pseudoinverse, solve_ridge_exact
from .sketch import SketchConfig, SketchResult, approximate_ridge_regression
from .tensor import as_tensor, frobenius_norm, multi_mode_product, rmse, unfold, vectorize

log = logging.getLogger(__name__)


@dataclass
class TuckerModel:
    core: np.ndarray
    factors: list[np.ndarray]
    lam: float = 0.0

    def __post_init__(self):
        if len(self.factors) != self.core.ndim:
            raise ValueError(f"{len(self.factors)} factors for a {self.core.ndim}-way core")
        for n, f in enumerate(self.factors):
            if f.ndim != 2 or f.shape[1] != self.core.shape[n]:
                raise ValueError(f"factor {n} has shape {f.shape}, core mode size {self.core.shape[n]}")
        if not np.all(np.isfinite(self.core)) or not all(np.all(np.isfinite(f)) for f in self.factors):
            raise ValueError("model has non-finite entries")
        if self.lam < 0:
            raise ValueError("lam must be non-negative")

    @property
    def ranks(self) -> tuple[int, ...]:
        return self.core.shape

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(f.shape[0] for f in self.factors)

    def reconstruct(self) -> np.ndarray:
        return multi_mode_product(self.core, self.factors)

    def copy(self) -> "TuckerModel":
        return TuckerModel(self.core.copy(), [f.copy() for f in self.factors], self.lam)


def random_model(shape, ranks, lam: float, rng: np.random.Generator) -> TuckerModel:
    """Factors then core, entries i.i.d. uniform on [0, 1]."""
    factors = [rng.random((i, r)) for i, r in zip(shape, ranks)]
    core = rng.random(tuple(ranks))
    return TuckerModel(core, factors, lam)


def tucker_loss(model: TuckerModel, x: np.ndarray) -> float:
    if model.shape != x.shape:
        raise ValueError(f"model shape {model.shape} does not match tensor shape {x.shape}")
    fit = frobenius_norm(x - model.reconstruct()) ** 2
    reg = frobenius_norm(model.core) ** 2 + sum(frobenius_norm(f) ** 2 for f in model.factors)
    return fit + model.lam * reg


def _solve_spd_rows(gram: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """rhs @ gram^{-1} (pseudoinverse when gram is singular)."""
    try:
        factor = scipy.linalg.cho_factor(gram)
        return scipy.linalg.cho_solve(factor, rhs.T).T
    except np.linalg.LinAlgError:
        return rhs @ pseudoinverse(gram)


def update_factor(model: TuckerModel, x: np.ndarray, mode: int) -> np.ndarray:
    """Exact ridge update of factor ``mode``; every row shares one Gram factorization."""
    k = unfold(multi_mode_product(model.core, model.factors, skip=mode), mode)
    gram = k @ k.T
    gram[np.diag_indices_from(gram)] += model.lam
    rhs = unfold(x, mode) @ k.T
    return _solve_spd_rows(gram, rhs)


def update_core_exact(model: TuckerModel, x: np.ndarray, method: str = "svd") -> np.ndarray:
    """Exact ridge solve for the core with K = A0 kron ... kron A_{N-1}.

    ``"svd"`` diagonalizes K^T K + lam I through the factor Gram
    eigendecompositions and never forms K; ``"materialized"`` builds K.
    """
    if method == "materialized":
        k = ImplicitKronecker(model.factors).materialize()
        return solve_ridge_exact(k, vectorize(x), model.lam).reshape(model.ranks)
    if method != "svd":
        raise ValueError(f"unknown method {method!r}")
    eig = [np.linalg.eigh(f.T @ f) for f in model.factors]
    z = multi_mode_product(x, model.factors, transpose=True)
    z = multi_mode_product(z, [v for _, v in eig], transpose=True)
    denom = np.ones(())
    for w, _ in eig:
        denom = np.multiply.outer(denom, np.clip(w, 0.0, None))
    denom = denom + model.lam
    cutoff = denom.size * np.finfo(np.float64).eps * denom.max()
    z = np.where(denom > cutoff, z / np.where(denom > cutoff, denom, 1.0), 0.0)
    return multi_mode_product(z, [v for _, v in eig])


def fast_core_solve(kron: ImplicitKronecker, x: np.ndarray, config: SketchConfig) -> SketchResult:
    """Sketched core solve with the product leverage distribution of K as overestimate."""
    return approximate_ridge_regression(kron, vectorize(x), kron, config, d_eff_lower=0.0)


def update_core_fast(model: TuckerModel, x: np.ndarray, config: SketchConfig) -> np.ndarray:
    config = dataclasses.replace(config, lam=model.lam)
    kron = ImplicitKronecker(model.factors)
    result = fast_core_solve(kron, x, config)
    if result.rank_deficient:
        log.warning("sketched core system is rank deficient; used pseudoinverse")
    return result.x.reshape(model.ranks)


@dataclass(frozen=True)
class AlsConfig:
    max_iterations: int = 50
    convergence_tol: float = 1e-6
    core_update: str | SketchConfig = "exact"
    seed: int = 0
    record_history: bool = True

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if self.convergence_tol < 0:
            raise ValueError("convergence_tol must be non-negative")
        if not (self.core_update == "exact" or isinstance(self.core_update, SketchConfig)):
            raise ValueError("core_update must be 'exact' or a SketchConfig")

    @property
    def sketched(self) -> bool:
        return isinstance(self.core_update, SketchConfig)


@dataclass
class AlsResult:
    model: TuckerModel
    history: list[dict] = field(default_factory=list)
    timings: dict[str, list[float]] = field(default_factory=dict)
    iterations: int = 0
    converged: bool = False

    def mean_timings(self) -> dict[str, float]:
        return {k: float(np.mean(v)) for k, v in self.timings.items()}


def check_ranks(shape, ranks) -> tuple[int, ...]:
    ranks = tuple(int(r) for r in ranks)
    if len(ranks) != len(shape):
        raise ValueError(f"{len(ranks)} ranks for a {len(shape)}-way tensor")
    for r, i in zip(ranks, shape):
        if not 1 <= r <= i:
            raise ValueError(f"rank {r} outside [1, {i}]")
    return ranks


def als(
    x,
    ranks,
    config: AlsConfig = AlsConfig(),
    lam: float = 0.001,
    init: TuckerModel | None = None,
) -> AlsResult:
    """Run ALS from a seeded uniform [0, 1] initialization (or ``init``).

    Stops when the relative loss change over a sweep drops below
    ``convergence_tol`` or after ``max_iterations`` sweeps.
    """
    x = as_tensor(x)
    ranks = check_ranks(x.shape, ranks)
    init_seq, sketch_seq = np.random.SeedSequence(config.seed).spawn(2)
    if init is None:
        model = random_model(x.shape, ranks, lam, np.random.default_rng(init_seq))
    else:
        if init.shape != x.shape or init.ranks != ranks:
            raise ValueError("init model does not match tensor shape and ranks")
        model = init.copy()
        model.lam = lam
    sketch_rng = np.random.default_rng(sketch_seq)

    result = AlsResult(model)
    steps = [f"F{n + 1}" for n in range(x.ndim)] + ["Core"]
    result.timings = {s: [] for s in steps}

    def record(iteration: int, step: str) -> float:
        loss = tucker_loss(model, x)
        result.history.append(
            {"iteration": iteration, "step": step, "loss": loss, "rmse": float(rmse(x, model.reconstruct()))}
        )
        return loss

    prev = tucker_loss(model, x)
    if config.record_history:
        record(0, "init")
    for it in range(1, config.max_iterations + 1):
        for n in range(x.ndim):
            t0 = time.perf_counter()
            model.factors[n] = update_factor(model, x, n)
            result.timings[steps[n]].append(time.perf_counter() - t0)
            if config.record_history:
                record(it, steps[n])
        t0 = time.perf_counter()
        if config.sketched:
            sk = dataclasses.replace(config.core_update, seed=int(sketch_rng.integers(2**63)))
            model.core = update_core_fast(model, x, sk)
        else:
            model.core = update_core_exact(model, x)
        result.timings["Core"].append(time.perf_counter() - t0)
        loss = record(it, "Core") if config.record_history else tucker_loss(model, x)
        result.iterations = it
        if abs(prev - loss) <= config.convergence_tol * max(abs(prev), np.finfo(float).tiny):
            result.converged = True
            break
        prev = loss
    return result
