"""Oracle suites run by ``ridge-tucker verify``.

Each check compares a library route against an independent brute-force
evaluation on small random instances.
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass

import numpy as np

from . import leverage, missing
from .kronecker import ImplicitKronecker
from .sampler import build_augmented
from .sketch import RowSketch, sample_sketch, verify_structural_conditions


@dataclass
class CheckResult:
    name: str
    passed: bool
    max_error: float
    tolerance: float

    def as_dict(self):
        out = asdict(self)
        out["passed"] = bool(self.passed)
        out["max_error"] = float(self.max_error)
        return out


def _random_matrix(rng, max_rows=50, max_cols=8):
    d = int(rng.integers(1, max_cols + 1))
    n = int(rng.integers(d, max_rows + 1))
    a = rng.standard_normal((n, d))
    if d > 1 and rng.random() < 0.25:
        a[:, -1] = a[:, 0]  # rank deficient
    return a


def _pinv_scores(a, lam):
    gram_inv = np.linalg.pinv(a.T @ a + lam * np.eye(a.shape[1]))
    return np.einsum("ij,jk,ik->i", a, gram_inv, a)


def suite_leverage(seed: int = 0, trials: int = 200) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    err_form = err_deff = err_aug = 0.0
    for _ in range(trials):
        a = _random_matrix(rng)
        lam = float(rng.choice([0.0, 0.01, 0.5, 2.0]))
        scores = leverage.ridge_scores(a, lam)
        err_form = max(err_form, np.max(np.abs(scores.scores - _pinv_scores(a, lam))))
        s = np.linalg.svd(a, compute_uv=False)
        s = s[s > max(a.shape) * np.finfo(float).eps * s[0]]
        err_deff = max(err_deff, abs(leverage.effective_dimension(scores) - np.sum(s**2 / (s**2 + lam))))
        if lam > 0:
            a_bar = np.vstack([a, np.sqrt(lam) * np.eye(a.shape[1])])
            aug = leverage.ridge_scores(a_bar, 0.0).scores[: a.shape[0]]
            err_aug = max(err_aug, np.max(np.abs(scores.scores - aug)))
    return [
        CheckResult("svd_vs_pinv_scores", err_form <= 1e-9, float(err_form), 1e-9),
        CheckResult("effective_dimension", err_deff <= 1e-9, float(err_deff), 1e-9),
        CheckResult("augmented_design_equality", err_aug <= 1e-9, float(err_aug), 1e-9),
    ]


def _random_factors(rng):
    n_factors = int(rng.integers(2, 4))
    while True:
        shapes = [(int(rng.integers(2, 9)), int(rng.integers(1, 4))) for _ in range(n_factors)]
        shapes = [(max(i, r), r) for i, r in shapes]
        if np.prod([i for i, _ in shapes]) <= 500 and np.prod([r for _, r in shapes]) <= 36:
            return [rng.standard_normal(s) for s in shapes]


def suite_kronecker(seed: int = 0, trials: int = 50) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    err_lev = err_cross = 0.0
    for _ in range(trials):
        k = ImplicitKronecker(_random_factors(rng))
        dense = k.materialize()
        exact = leverage.ridge_scores(dense, 0.0).scores
        err_lev = max(err_lev, np.max(np.abs(k.factored_leverage_scores() - exact)))
        lam = float(rng.uniform(0.05, 3.0))
        l = leverage.cross_scores(dense, lam).l
        pairs = rng.integers(0, k.n, size=(20, 2))
        for i, j in pairs:
            got = k.ridge_cross_score(k.unravel(i), k.unravel(j), lam)
            err_cross = max(err_cross, abs(got - l[i, j]))
    return [
        CheckResult("factored_leverage_scores", err_lev <= 1e-9, float(err_lev), 1e-9),
        CheckResult("ridge_cross_scores", err_cross <= 1e-9, float(err_cross), 1e-9),
    ]


def suite_missing(seed: int = 0, trials: int = 100) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    err_update = 0.0
    violation = 0.0
    for _ in range(trials):
        d = int(rng.integers(1, 6))
        n = int(rng.integers(d + 2, 25))
        a = rng.standard_normal((n, d))
        lam = float(rng.uniform(0.05, 3.0))
        removed = rng.choice(n, size=int(rng.integers(0, n - 1)), replace=False)
        ctx = missing.RowRemovalContext.build(a, removed, lam)
        updated = missing.exact_scores_after_removal(ctx).scores
        direct = leverage.ridge_scores(a[ctx.kept], lam).scores
        err_update = max(err_update, np.max(np.abs(updated - direct)))
        bound = missing.score_upper_bound_after_removal(ctx).scores
        violation = max(violation, np.max(updated - bound))
    err_sum = 0.0
    for _ in range(20):
        a = rng.standard_normal((int(rng.integers(3, 15)), int(rng.integers(1, 4))))
        scores = leverage.ridge_scores(a, 0.0).scores
        i = int(rng.integers(a.shape[0]))
        err_sum = max(err_sum, abs(missing.sum_squared_cross_bound(a, 0.0, i) - scores[i]))
    return [
        CheckResult("woodbury_update", err_update <= 1e-8, float(err_update), 1e-8),
        CheckResult("upper_bound_dominates", violation <= 1e-10, float(max(violation, 0.0)), 1e-10),
        CheckResult("sum_squared_cross_equality", err_sum <= 1e-10, float(err_sum), 1e-10),
    ]


def suite_sketch(seed: int = 0, trials: int = 50) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((30, 3))
    b = rng.standard_normal(30)
    lam = 0.5
    full = RowSketch(np.arange(33), np.ones(33))
    ident = verify_structural_conditions(a, b, full, lam, 0.1)
    sampler = build_augmented(leverage.leverage_scores(a), 30, 3, 0.0, seed=seed)
    ok = sum(verify_structural_conditions(a, b, sample_sketch(sampler, 2000), lam, 0.1).cond1 >= 1 / np.sqrt(2)
             for _ in range(trials))
    return [
        CheckResult("identity_sketch", abs(ident.cond1 - 1) <= 1e-12 and ident.cond2 <= 1e-20,
                    abs(ident.cond1 - 1) + ident.cond2, 1e-12),
        CheckResult("subspace_embedding_rate", ok >= 0.9 * trials, 1.0 - ok / trials, 0.1),
    ]


SUITES = {
    "leverage": suite_leverage,
    "kronecker": suite_kronecker,
    "missing": suite_missing,
    "sketch": suite_sketch,
}


def run_suite(name: str, seed: int = 0) -> dict:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    t0 = time.perf_counter()
    checks = SUITES[name](seed)
    return {
        "suite": name,
        "passed": bool(all(c.passed for c in checks)),
        "seconds": time.perf_counter() - t0,
        "checks": [c.as_dict() for c in checks],
    }
