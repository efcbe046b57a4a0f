"""Dense order-3 tensor primitives: mode products, matricization, norms.

Tensors are plain float ndarrays of shape (d1, d2, d3). Matricization along
mode k puts mode-k indices on the rows; the columns run over the remaining
modes in increasing order with the first of them varying fastest, so that
``matricize(mode_product(T, U, k), k) == U @ matricize(T, k)``.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "mode_product",
    "matricize",
    "fold",
    "inner",
    "frobenius",
    "spectral_norm_approx",
]


def _as_tensor3(t) -> np.ndarray:
    t = np.asarray(t, dtype=np.float64)
    if t.ndim != 3:
        raise ValueError(f"expected an order-3 tensor, got ndim={t.ndim}")
    return t


def _check_mode(mode: int) -> int:
    if mode not in (1, 2, 3):
        raise ValueError(f"mode must be 1, 2 or 3, got {mode!r}")
    return mode - 1


def mode_product(t, m, mode: int) -> np.ndarray:
    """Contract mode `mode` of tensor `t` against the columns of matrix `m`.

    Output dims replace t.shape[mode-1] with m.shape[0]:
    ``(T x_k M)[..., j, ...] = sum_i T[..., i, ...] * M[j, i]``.
    """
    t = _as_tensor3(t)
    axis = _check_mode(mode)
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError(f"expected a matrix, got ndim={m.ndim}")
    if m.shape[1] != t.shape[axis]:
        raise ValueError(
            f"mode-{mode} product needs matrix with {t.shape[axis]} columns, "
            f"got {m.shape[1]}"
        )
    return np.moveaxis(np.tensordot(m, t, axes=(1, axis)), 0, axis)


def matricize(t, mode: int) -> np.ndarray:
    """Flatten `t` into a matrix with mode-`mode` indices on the rows."""
    t = _as_tensor3(t)
    axis = _check_mode(mode)
    return np.moveaxis(t, axis, 0).reshape(t.shape[axis], -1, order="F")


def fold(m, mode: int, dims) -> np.ndarray:
    """Inverse of :func:`matricize` for a tensor of shape `dims`."""
    axis = _check_mode(mode)
    dims = tuple(int(d) for d in dims)
    if len(dims) != 3:
        raise ValueError(f"dims must have length 3, got {dims}")
    m = np.asarray(m, dtype=np.float64)
    rest = [d for i, d in enumerate(dims) if i != axis]
    if m.shape != (dims[axis], rest[0] * rest[1]):
        raise ValueError(f"matrix of shape {m.shape} does not fold into {dims}")
    return np.moveaxis(m.reshape([dims[axis]] + rest, order="F"), 0, axis)


def inner(t, y) -> float:
    """Entrywise inner product of two tensors of equal dims."""
    t = _as_tensor3(t)
    y = _as_tensor3(y)
    if t.shape != y.shape:
        raise ValueError(f"dims mismatch: {t.shape} vs {y.shape}")
    return float(np.dot(t.ravel(), y.ravel()))


def frobenius(t) -> float:
    """Frobenius norm, sqrt(<T, T>)."""
    return float(np.linalg.norm(_as_tensor3(t).ravel()))


def spectral_norm_approx(
    t, restarts: int = 16, iters: int = 100, seed=None, tol: float = 1e-10
) -> float:
    """Lower estimate of the tensor spectral norm sup <T, u o v o w>.

    Runs rank-(1,1,1) alternating power iteration from `restarts` random unit
    starting points and returns the best value found. Deterministic given
    `seed`; never exceeds the true norm.
    """
    t = _as_tensor3(t)
    if restarts < 1:
        raise ValueError(f"restarts must be >= 1, got {restarts}")
    if not np.any(t):
        return 0.0
    rng = np.random.default_rng(seed)
    best = 0.0
    for _ in range(restarts):
        u = _random_unit(rng, t.shape[0])
        v = _random_unit(rng, t.shape[1])
        w = _random_unit(rng, t.shape[2])
        value = 0.0
        for _ in range(iters):
            u = _normalized(np.einsum("ijk,j,k->i", t, v, w))
            v = _normalized(np.einsum("ijk,i,k->j", t, u, w))
            raw = np.einsum("ijk,i,j->k", t, u, v)
            norm = np.linalg.norm(raw)
            if norm == 0.0:
                value = 0.0
                break
            w = raw / norm
            if abs(norm - value) <= tol * max(1.0, norm):
                value = norm
                break
            value = norm
        best = max(best, value)
    return float(best)


def _random_unit(rng, dim: int) -> np.ndarray:
    while True:
        v = rng.standard_normal(dim)
        norm = np.linalg.norm(v)
        if norm > 0.0:
            return v / norm


def _normalized(v: np.ndarray) -> np.ndarray:
    norm = np.linalg.norm(v)
    return v if norm == 0.0 else v / norm
