import itertools
import struct

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ridge_tucker.tensor import (
    TensorFormatError,
    devectorize,
    fold,
    frobenius_norm,
    mode_n_product,
    multi_mode_product,
    read_csv_tensor,
    read_tensor,
    rmse,
    unfold,
    vectorize,
    write_tensor,
)

shapes = st.lists(st.integers(1, 4), min_size=1, max_size=4).map(tuple)


def loop_mode_product(t, m, mode):
    """Elementwise definition: Y[..., j, ...] = sum_i T[..., i, ...] M[j, i]."""
    out_shape = t.shape[:mode] + (m.shape[0],) + t.shape[mode + 1 :]
    out = np.zeros(out_shape)
    for idx in itertools.product(*map(range, out_shape)):
        for i in range(t.shape[mode]):
            src = idx[:mode] + (i,) + idx[mode + 1 :]
            out[idx] += t[src] * m[idx[mode], i]
    return out


def test_unfold_small_example():
    t = np.arange(8.0).reshape(2, 2, 2)
    np.testing.assert_array_equal(unfold(t, 2), [[0, 2, 4, 6], [1, 3, 5, 7]])
    np.testing.assert_array_equal(unfold(t, 0), [[0, 1, 2, 3], [4, 5, 6, 7]])


@given(shapes, st.data())
def test_fold_inverts_unfold(shape, data):
    t = np.arange(np.prod(shape), dtype=float).reshape(shape)
    mode = data.draw(st.integers(0, len(shape) - 1))
    np.testing.assert_array_equal(fold(unfold(t, mode), mode, shape), t)


def test_mode_product_matches_loops(rng):
    t = rng.standard_normal((3, 4, 2))
    for mode in range(3):
        m = rng.standard_normal((5, t.shape[mode]))
        np.testing.assert_allclose(mode_n_product(t, m, mode), loop_mode_product(t, m, mode), atol=1e-12)


def test_mode_products_commute_on_distinct_modes(rng):
    t = rng.standard_normal((3, 4, 5))
    a, b = rng.standard_normal((2, 3)), rng.standard_normal((6, 5))
    np.testing.assert_allclose(
        mode_n_product(mode_n_product(t, a, 0), b, 2), mode_n_product(mode_n_product(t, b, 2), a, 0), atol=1e-12
    )


def test_same_mode_products_compose(rng):
    t = rng.standard_normal((3, 4))
    a, b = rng.standard_normal((5, 4)), rng.standard_normal((2, 5))
    np.testing.assert_allclose(mode_n_product(mode_n_product(t, a, 1), b, 1), mode_n_product(t, b @ a, 1), atol=1e-12)


@given(st.lists(st.tuples(st.integers(1, 4), st.integers(1, 3)), min_size=1, max_size=3), st.integers(0, 2**32 - 1))
def test_vectorized_tucker_is_kronecker(dims, seed):
    rng = np.random.default_rng(seed)
    factors = [rng.standard_normal(d) for d in dims]
    core = rng.standard_normal([r for _, r in dims])
    k = factors[0]
    for f in factors[1:]:
        k = np.kron(k, f)
    np.testing.assert_allclose(vectorize(multi_mode_product(core, factors)), k @ vectorize(core), atol=1e-10)


def test_tucker_elementwise(rng):
    core = rng.standard_normal((2, 3, 2))
    factors = [rng.standard_normal((3, 2)), rng.standard_normal((2, 3)), rng.standard_normal((4, 2))]
    x = multi_mode_product(core, factors)
    for i, j, k in itertools.product(range(3), range(2), range(4)):
        expected = np.einsum("abc,a,b,c->", core, factors[0][i], factors[1][j], factors[2][k])
        assert x[i, j, k] == pytest.approx(expected, abs=1e-12)


def test_multi_mode_product_skip_and_transpose(rng):
    t = rng.standard_normal((3, 4))
    a, b = rng.standard_normal((3, 2)), rng.standard_normal((4, 5))
    np.testing.assert_allclose(multi_mode_product(t, [a, b], transpose=True), a.T @ t @ b, atol=1e-12)
    np.testing.assert_allclose(multi_mode_product(t, [a, b], skip=0, transpose=True), t @ b, atol=1e-12)


def test_vectorize_round_trip_and_norms():
    t = np.arange(6.0).reshape(2, 3)
    np.testing.assert_array_equal(devectorize(vectorize(t), (2, 3)), t)
    assert frobenius_norm(np.ones((2, 2, 2))) == pytest.approx(np.sqrt(8))
    assert rmse(np.zeros((2, 2)), np.full((2, 2), 3.0)) == pytest.approx(3.0)
    with pytest.raises(ValueError):
        devectorize(np.ones(5), (2, 3))


def test_invalid_tensors_and_modes():
    with pytest.raises(ValueError):
        unfold(np.ones((2, 2)), 2)
    with pytest.raises(ValueError):
        mode_n_product(np.ones((2, 2)), np.ones((3, 3)), 0)
    with pytest.raises(ValueError):
        write_tensor(np.array([[np.nan]]), "unused.dten")


def test_dten_round_trip(tmp_path, rng):
    t = rng.standard_normal((3, 1, 4))
    path = tmp_path / "t.dten"
    write_tensor(t, path)
    raw = path.read_bytes()
    assert raw[:4] == b"DTEN" and raw[4] == 1
    assert struct.unpack_from("<I3Q", raw, 5) == (3, 3, 1, 4)
    assert len(raw) == 9 + 24 + 8 * 12
    np.testing.assert_array_equal(read_tensor(path), t)


@pytest.mark.parametrize(
    "mutate",
    [
        lambda raw: b"XTEN" + raw[4:],
        lambda raw: raw[:4] + b"\x02" + raw[5:],
        lambda raw: raw[:-8],
        lambda raw: raw + b"\x00" * 8,
        lambda raw: raw[:5] + struct.pack("<I", 9) + raw[9:],
        lambda raw: raw[:9] + struct.pack("<Q", 0) + raw[17:],
        lambda raw: raw[:9] + struct.pack("<Q", 2**62) + raw[17:],
        lambda raw: raw[:6],
    ],
)
def test_dten_malformed(tmp_path, mutate):
    path = tmp_path / "t.dten"
    write_tensor(np.ones((2, 2)), path)
    path.write_bytes(mutate(path.read_bytes()))
    with pytest.raises(TensorFormatError):
        read_tensor(path)


def test_csv_tensor(tmp_path):
    path = tmp_path / "t.csv"
    path.write_text("i,j,k,value\n# comment\n0,0,0,1.5\n1,2,0,-2\n")
    t = read_csv_tensor(path)
    assert t.shape == (2, 3, 1)
    assert t[0, 0, 0] == 1.5 and t[1, 2, 0] == -2 and t.sum() == -0.5
    assert read_csv_tensor(path, shape=(3, 3, 2)).shape == (3, 3, 2)
    path.write_text("0,0,1\n0,x\n")
    with pytest.raises(TensorFormatError):
        read_csv_tensor(path)
