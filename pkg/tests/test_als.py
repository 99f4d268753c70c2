import numpy as np
import pytest

from ridge_tucker.als import (
    AlsConfig,
    TuckerModel,
    als,
    random_model,
    tucker_loss,
    update_core_exact,
    update_core_fast,
    update_factor,
)
from ridge_tucker.kronecker import ImplicitKronecker
from ridge_tucker.linalg import solve_ridge_exact
from ridge_tucker.sketch import SketchConfig
from ridge_tucker.tensor import multi_mode_product, unfold, vectorize


def make_model(rng, shape, ranks, lam=0.0):
    return TuckerModel(rng.standard_normal(ranks), [rng.standard_normal((i, r)) for i, r in zip(shape, ranks)], lam)


def core_objective(model, core, x):
    m = TuckerModel(core, model.factors, model.lam)
    return np.sum((x - m.reconstruct()) ** 2) + model.lam * np.sum(core**2)


def test_loss_examples(rng):
    model = make_model(rng, (3, 4, 2), (2, 2, 2))
    x = model.reconstruct()
    assert tucker_loss(model, x) == pytest.approx(0.0, abs=1e-20)
    zero = TuckerModel(np.zeros((2, 2, 2)), [np.zeros((i, 2)) for i in (3, 4, 2)], 0.5)
    assert tucker_loss(zero, x) == pytest.approx(np.sum(x**2))
    model.lam = 0.1
    reg = np.sum(model.core**2) + sum(np.sum(f**2) for f in model.factors)
    assert tucker_loss(model, x) == pytest.approx(0.1 * reg)


def test_model_validation(rng):
    with pytest.raises(ValueError):
        TuckerModel(np.ones((2, 2)), [np.ones((3, 2))])
    with pytest.raises(ValueError):
        TuckerModel(np.ones((2, 2)), [np.ones((3, 2)), np.ones((3, 3))])
    with pytest.raises(ValueError):
        tucker_loss(make_model(rng, (3, 3), (2, 2)), np.ones((3, 4)))


def test_factor_update_per_row_oracle(rng):
    x = rng.standard_normal((4, 3, 2))
    model = make_model(rng, (4, 3, 2), (2, 2, 2), lam=0.2)
    for mode in range(3):
        k = unfold(multi_mode_product(model.core, model.factors, skip=mode), mode)
        new = update_factor(model, x, mode)
        xn = unfold(x, mode)
        for i in range(x.shape[mode]):
            np.testing.assert_allclose(new[i], solve_ridge_exact(k.T, xn[i], 0.2), atol=1e-10)


def test_factor_update_fixed_point(rng):
    model = make_model(rng, (5, 4, 3), (2, 2, 2))
    x = model.reconstruct()
    for mode in range(3):
        np.testing.assert_allclose(update_factor(model, x, mode), model.factors[mode], atol=1e-9)
    np.testing.assert_allclose(update_core_exact(model, x), model.core, atol=1e-9)


def test_large_lambda_shrinks_to_zero(rng):
    model = make_model(rng, (4, 3, 2), (2, 2, 2), lam=1e12)
    x = rng.standard_normal((4, 3, 2))
    assert np.abs(update_factor(model, x, 0)).max() < 1e-8
    assert np.abs(update_core_exact(model, x)).max() < 1e-8


def test_core_identity_factors():
    x = np.arange(24.0).reshape(2, 3, 4)
    model = TuckerModel(np.zeros((2, 3, 4)), [np.eye(2), np.eye(3), np.eye(4)], 0.0)
    np.testing.assert_allclose(update_core_exact(model, x), x, atol=1e-12)


@pytest.mark.parametrize("lam", [0.0, 0.1])
def test_core_svd_matches_materialized(rng, lam):
    model = make_model(rng, (4, 3, 2), (2, 2, 2), lam=lam)
    x = rng.standard_normal((4, 3, 2))
    np.testing.assert_allclose(update_core_exact(model, x), update_core_exact(model, x, "materialized"), atol=1e-10)
    k = ImplicitKronecker(model.factors).materialize()
    np.testing.assert_allclose(vectorize(update_core_exact(model, x)), solve_ridge_exact(k, vectorize(x), lam), atol=1e-10)


def test_core_rank_deficient_factor(rng):
    f0 = rng.standard_normal((4, 1)) @ np.ones((1, 2))
    model = TuckerModel(np.zeros((2, 2)), [f0, rng.standard_normal((3, 2))], 0.0)
    x = rng.standard_normal((4, 3))
    np.testing.assert_allclose(update_core_exact(model, x), update_core_exact(model, x, "materialized"), atol=1e-9)


def test_core_projection_identity(rng):
    # with orthonormal factors and lam = 0 the core is X projected onto the factor spaces
    factors = [np.linalg.qr(rng.standard_normal((i, 2)))[0] for i in (5, 4, 3)]
    model = TuckerModel(np.zeros((2, 2, 2)), factors, 0.0)
    x = rng.standard_normal((5, 4, 3))
    np.testing.assert_allclose(update_core_exact(model, x), multi_mode_product(x, factors, transpose=True), atol=1e-12)


def test_fast_core_identity_factors_full_coverage():
    x = np.arange(8.0).reshape(2, 2, 2) + 1
    model = TuckerModel(np.zeros((2, 2, 2)), [np.eye(2)] * 3, 0.0)
    core = update_core_fast(model, x, SketchConfig(0.1, 0.1, sample_count_override=2000, seed=1))
    np.testing.assert_allclose(core, x, atol=1e-12)


def test_fast_core_objective_ratio():
    rng = np.random.default_rng(12)
    x = rng.random((8, 8, 8))
    model = TuckerModel(np.zeros((2, 2, 2)), [rng.random((8, 2)) for _ in range(3)], 0.01)
    best = core_objective(model, update_core_exact(model, x), x)
    ok = sum(
        core_objective(model, update_core_fast(model, x, SketchConfig(0.5, 0.3, sample_count_override=200, seed=t)), x)
        <= 1.5 * best
        for t in range(100)
    )
    assert ok >= 70


def test_exact_als_is_monotone():
    rng = np.random.default_rng(0)
    x = rng.random((8, 7, 6))
    res = als(x, (3, 3, 2), AlsConfig(max_iterations=15, convergence_tol=0.0), lam=0.01)
    losses = [h["loss"] for h in res.history]
    assert len(losses) == 1 + 15 * 4
    assert all(b <= a * (1 + 1e-9) for a, b in zip(losses, losses[1:]))


def test_planted_recovery():
    hits = 0
    for seed in range(20):
        rng = np.random.default_rng(100 + seed)
        x = random_model((10, 10, 10), (2, 2, 2), 0.0, rng).reconstruct()
        res = als(x, (2, 2, 2), AlsConfig(max_iterations=20, convergence_tol=0.0, seed=seed), lam=1e-6)
        hits += res.history[-1]["rmse"] < 1e-3
    assert hits >= 16


def test_single_iteration_contract(rng):
    x = rng.random((5, 4, 3))
    res = als(x, (2, 2, 2), AlsConfig(max_iterations=1))
    assert res.iterations == 1
    assert [h["step"] for h in res.history] == ["init", "F1", "F2", "F3", "Core"]
    assert set(res.timings) == {"F1", "F2", "F3", "Core"}
    assert all(len(v) == 1 for v in res.timings.values())


def test_exact_and_sketched_share_first_factor_steps(rng):
    x = rng.random((6, 5, 4))
    exact = als(x, (2, 2, 2), AlsConfig(max_iterations=2, seed=3))
    sketched = als(x, (2, 2, 2), AlsConfig(max_iterations=2, seed=3, core_update=SketchConfig(0.1, 0.1)))
    for a, b in zip(exact.history[:4], sketched.history[:4]):
        assert a == b
    assert exact.history[4]["step"] == sketched.history[4]["step"] == "Core"


def test_init_model_is_copied_and_lambda_applied(rng):
    x = rng.random((4, 4))
    init = random_model((4, 4), (2, 2), 5.0, rng)
    before = init.copy()
    res = als(x, (2, 2), AlsConfig(max_iterations=2), lam=0.01, init=init)
    assert res.model.lam == 0.01
    np.testing.assert_array_equal(init.core, before.core)


def test_invalid_configs():
    with pytest.raises(ValueError):
        AlsConfig(max_iterations=0)
    with pytest.raises(ValueError):
        AlsConfig(core_update="fast")
    with pytest.raises(ValueError):
        als(np.ones((3, 3)), (4, 1))
