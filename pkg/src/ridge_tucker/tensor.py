"""Dense N-way tensors: unfolding, mode-n products, vectorization and file I/O.

Tensors are C-ordered numpy arrays, so the last index varies fastest both in
memory and in ``vectorize``. With this ordering

    vectorize(G x_0 A0 x_1 A1 ... ) == kron(A0, A1, ...) @ vectorize(G)

which is the pairing the core update relies on. Modes are 0-based.

Unfolding along mode n moves axis n to the front; columns are indexed by the
remaining modes in increasing order, last fastest.

File format (DTEN1, all little-endian)::

    b"DTEN"  u8 version=1  u32 N  N x u64 shape  prod(shape) x f64 data
"""

from __future__ import annotations

import csv
import struct
from pathlib import Path

import numpy as np

MAX_ORDER = 8
MAGIC = b"DTEN"
VERSION = 1
_HEADER = struct.Struct("<4sBI")


class TensorFormatError(ValueError):
    pass


def as_tensor(t, name: str = "tensor") -> np.ndarray:
    t = np.ascontiguousarray(t, dtype=np.float64)
    if not 1 <= t.ndim <= MAX_ORDER:
        raise ValueError(f"{name} must have 1..{MAX_ORDER} modes, got {t.ndim}")
    if t.size == 0:
        raise ValueError(f"{name} is empty")
    if not np.all(np.isfinite(t)):
        raise ValueError(f"{name} contains NaN or Inf")
    return t


def _check_mode(ndim: int, mode: int) -> None:
    if not 0 <= mode < ndim:
        raise ValueError(f"mode {mode} out of range for a {ndim}-way tensor")


def unfold(t: np.ndarray, mode: int) -> np.ndarray:
    _check_mode(t.ndim, mode)
    return np.moveaxis(t, mode, 0).reshape(t.shape[mode], -1)


def fold(m: np.ndarray, mode: int, shape) -> np.ndarray:
    shape = tuple(int(s) for s in shape)
    _check_mode(len(shape), mode)
    moved = (shape[mode],) + shape[:mode] + shape[mode + 1 :]
    return np.ascontiguousarray(np.moveaxis(np.reshape(m, moved), 0, mode))


def mode_n_product(t: np.ndarray, m: np.ndarray, mode: int) -> np.ndarray:
    """(t x_mode m)[..., j, ...] = sum_i t[..., i, ...] * m[j, i]."""
    _check_mode(t.ndim, mode)
    if m.ndim != 2 or m.shape[1] != t.shape[mode]:
        raise ValueError(f"matrix {m.shape} incompatible with mode {mode} of size {t.shape[mode]}")
    out = np.tensordot(m, t, axes=(1, mode))
    return np.ascontiguousarray(np.moveaxis(out, 0, mode))


def multi_mode_product(t: np.ndarray, matrices, skip: int | None = None, transpose: bool = False) -> np.ndarray:
    for n, m in enumerate(matrices):
        if n == skip:
            continue
        t = mode_n_product(t, m.T if transpose else m, n)
    return t


def vectorize(t: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(t).reshape(-1)


def devectorize(v: np.ndarray, shape) -> np.ndarray:
    shape = tuple(int(s) for s in shape)
    v = np.asarray(v)
    if v.ndim != 1 or v.size != int(np.prod(shape)):
        raise ValueError(f"vector of length {v.size} cannot fill shape {shape}")
    return v.reshape(shape).copy()


def frobenius_norm(t: np.ndarray) -> float:
    return float(np.sqrt(np.sum(np.square(t))))


def rmse(t: np.ndarray, u: np.ndarray) -> float:
    if t.shape != u.shape:
        raise ValueError(f"shape mismatch {t.shape} vs {u.shape}")
    return float(frobenius_norm(t - u) / np.sqrt(t.size))


def write_tensor(t, path) -> None:
    t = as_tensor(t)
    header = _HEADER.pack(MAGIC, VERSION, t.ndim) + struct.pack(f"<{t.ndim}Q", *t.shape)
    with open(path, "wb") as f:
        f.write(header)
        f.write(t.astype("<f8", copy=False).tobytes(order="C"))


def read_tensor(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise TensorFormatError("truncated header")
    magic, version, ndim = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise TensorFormatError(f"bad magic {magic!r}")
    if version != VERSION:
        raise TensorFormatError(f"unsupported version {version}")
    if not 1 <= ndim <= MAX_ORDER:
        raise TensorFormatError(f"unsupported order {ndim}")
    offset = _HEADER.size + 8 * ndim
    if len(raw) < offset:
        raise TensorFormatError("truncated shape")
    shape = struct.unpack_from(f"<{ndim}Q", raw, _HEADER.size)
    count = 1
    for s in shape:
        if s == 0:
            raise TensorFormatError("zero-length mode")
        count *= s
        if count * 8 > len(raw):
            raise TensorFormatError(f"shape {shape} overflows the payload")
    if len(raw) != offset + 8 * count:
        raise TensorFormatError(f"payload is {len(raw) - offset} bytes, expected {8 * count}")
    data = np.frombuffer(raw, dtype="<f8", count=count, offset=offset)
    return as_tensor(data.astype(np.float64).reshape(shape))


def read_csv_tensor(path, shape=None) -> np.ndarray:
    """Read ``i1,...,iN,value`` lines (0-based indices); missing entries are zero."""
    entries = []
    with open(path, newline="") as f:
        for row in csv.reader(f):
            if not row or row[0].lstrip().startswith("#"):
                continue
            try:
                *idx, value = row
                entries.append((tuple(int(i) for i in idx), float(value)))
            except ValueError:
                if not entries:
                    continue  # header line
                raise TensorFormatError(f"bad CSV line {row!r}") from None
    if not entries:
        raise TensorFormatError("no entries")
    order = len(entries[0][0])
    if any(len(i) != order for i, _ in entries):
        raise TensorFormatError("inconsistent index arity")
    if shape is None:
        shape = tuple(max(i[n] for i, _ in entries) + 1 for n in range(order))
    t = np.zeros(tuple(shape))
    for idx, value in entries:
        t[idx] = value
    return as_tensor(t)
