# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Streaming kernels: O(D^2) working memory per lag and per replicate."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()


def lag_products(const double[:, ::1] coef, Py_ssize_t h):
    cdef Py_ssize_t T = coef.shape[0], D = coef.shape[1]
    cdef Py_ssize_t n_t = T - h if T > h else 0
    out = np.empty((n_t, D * D))
    cdef double[:, ::1] P = out
    cdef Py_ssize_t t, i, j
    for t in range(n_t):
        for i in range(D):
            for j in range(D):
                P[t, i * D + j] = coef[t, i] * coef[t + h, j]
    return out


def lagcov_path(const double[:, ::1] coef, Py_ssize_t h):
    cdef Py_ssize_t T = coef.shape[0], D = coef.shape[1]
    final = np.zeros((D, D))
    if h >= T:
        return 0.0, final
    cdef double[:, ::1] A = final
    cdef Py_ssize_t t, i, j
    cdef double sq, total = 0.0, ai
    cdef double inv_T = 1.0 / T
    for t in range(T - h):
        sq = 0.0
        for i in range(D):
            ai = coef[t, i] * inv_T
            for j in range(D):
                A[i, j] += ai * coef[t + h, j]
                sq += A[i, j] * A[i, j]
        if t < T - h - 1:
            total += sq
        else:
            total += h * sq
    return total * inv_T, final


def local_moments(const double[:, ::1] products, Py_ssize_t n):
    cdef Py_ssize_t n_t = products.shape[0], P = products.shape[1]
    out = np.empty((n_t, P))
    cdef double[:, ::1] mu = out
    cdef double[::1] acc = np.zeros(P)
    cdef Py_ssize_t t, d, lo = 0, hi = -1, new_lo, new_hi, width
    for t in range(n_t):
        new_lo = t - n if t > n else 0
        new_hi = t + n if t + n < n_t - 1 else n_t - 1
        while hi < new_hi:
            hi += 1
            for d in range(P):
                acc[d] += products[hi, d]
        while lo < new_lo:
            for d in range(P):
                acc[d] -= products[lo, d]
            lo += 1
        width = hi - lo + 1
        for d in range(P):
            mu[t, d] = acc[d] / width
    return out


def block_sums(const double[:, ::1] centered, Py_ssize_t m):
    cdef Py_ssize_t n_t = centered.shape[0], P = centered.shape[1]
    out = np.zeros((n_t, P))
    if n_t == 0:
        return out
    cdef double[:, ::1] C = out
    cdef Py_ssize_t i, d, end = m if m < n_t else n_t
    for i in range(end):
        for d in range(P):
            C[0, d] += centered[i, d]
    for i in range(1, n_t):
        for d in range(P):
            C[i, d] = C[i - 1, d] - centered[i - 1, d]
        if i + m - 1 < n_t:
            for d in range(P):
                C[i, d] += centered[i + m - 1, d]
    return out


def bootstrap_lag(const double[:, ::1] products, const double[:, ::1] centered,
                  const double[:, ::1] multipliers, Py_ssize_t m, Py_ssize_t T):
    cdef Py_ssize_t n_t = products.shape[0], P = products.shape[1]
    cdef Py_ssize_t K = multipliers.shape[0]
    norm_out = np.zeros(K)
    inner_out = np.zeros(K)
    if n_t == 0:
        return norm_out, inner_out
    cdef double[::1] norm_sq = norm_out, inner = inner_out
    cdef double[:, ::1] C = block_sums(centered, m)
    cdef double[:, ::1] A = np.cumsum(products, axis=0) / T
    cdef double[::1] B = np.empty(P)
    cdef Py_ssize_t h = T - n_t, k, s, d
    cdef double scale = 1.0 / sqrt(<double>T * m)
    cdef double r, sq, ip, ns, acc_ip, w
    for k in range(K):
        for d in range(P):
            B[d] = 0.0
        ns = 0.0
        acc_ip = 0.0
        for s in range(n_t):
            r = multipliers[k, s] * scale
            sq = 0.0
            ip = 0.0
            for d in range(P):
                B[d] += r * C[s, d]
                sq += B[d] * B[d]
                ip += A[s, d] * B[d]
            w = h if s == n_t - 1 else 1.0
            ns += w * sq
            acc_ip += w * ip
        norm_sq[k] = ns / T
        inner[k] = acc_ip / T
    return norm_out, inner_out
