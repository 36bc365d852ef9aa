"""Vectorised numpy kernels; used whenever the compiled extension is unavailable.

Products are stored flattened: row ``t`` of a product array is
``np.outer(a[t], a[t + h]).ravel()``.
"""

import numpy as np


def lag_products(coef, h):
    T, D = coef.shape
    n_t = max(T - h, 0)
    return np.einsum("ti,tj->tij", coef[:n_t], coef[h : h + n_t]).reshape(n_t, D * D)


def lagcov_path(coef, h):
    """Squared integrated norm of the cumulative lag-``h`` process and its endpoint."""
    T, D = coef.shape
    if h >= T:
        return 0.0, np.zeros((D, D))
    A = np.cumsum(lag_products(coef, h), axis=0) / T
    sq = np.einsum("ij,ij->i", A, A)
    # s = 0 contributes A_0 = 0; the final value is held for h steps
    norm_sq = (sq[:-1].sum() + h * sq[-1]) / T
    return float(norm_sq), A[-1].reshape(D, D)


def local_moments(products, n):
    """Windowed means over ``[max(t - n, 1), min(t + n, T - h)]`` for each ``t``."""
    n_t = products.shape[0]
    cs = np.zeros((n_t + 1, products.shape[1]))
    np.cumsum(products, axis=0, out=cs[1:])
    t = np.arange(n_t)
    lo = np.maximum(t - n, 0)
    hi = np.minimum(t + n, n_t - 1) + 1
    return (cs[hi] - cs[lo]) / (hi - lo)[:, None]


def block_sums(centered, m):
    n_t = centered.shape[0]
    cs = np.zeros((n_t + 1, centered.shape[1]))
    np.cumsum(centered, axis=0, out=cs[1:])
    start = np.arange(n_t)
    return cs[np.minimum(start + m, n_t)] - cs[start]


def bootstrap_lag(products, centered, multipliers, m, T):
    """Integrated squared norms of the bootstrap processes and their inner
    products with the cumulative lag process, for every row of ``multipliers``.

    The process is linear in the multipliers, so the squared norm is a quadratic
    form ``R' (G * W) R`` with ``G`` the Gram matrix of the block sums and
    ``W[i, j] = T - max(i, j)`` counting the grid cells where both summands are
    active.
    """
    n_t = products.shape[0]
    K = multipliers.shape[0]
    if n_t == 0:
        return np.zeros(K), np.zeros(K)
    h = T - n_t
    R = multipliers[:, :n_t]
    C = block_sums(centered, m)
    idx = np.arange(n_t)
    weight = T - 1.0 - np.maximum.outer(idx, idx)
    Q = (C @ C.T) * weight
    scale_sq = 1.0 / (T * m)
    norm_sq = scale_sq / T * np.einsum("ki,ki->k", R @ Q, R)

    A = np.cumsum(products, axis=0) / T
    A[-1] *= h
    Z = np.cumsum(A[::-1], axis=0)[::-1]
    c = np.einsum("ij,ij->i", C, Z)
    inner = np.sqrt(scale_sq) / T * (R @ c)
    return norm_sq, inner
