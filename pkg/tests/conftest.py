import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def brute_force_path(coef, h):
    """Materialise every step value A_s, s = 0..T-1, of the cumulative lag process."""
    T, D = coef.shape
    A = np.zeros((T, D, D))
    for s in range(T):
        for t in range(min(s, T - h)):
            A[s] += np.outer(coef[t], coef[t + h]) / T
    return A


def brute_force_bootstrap(coef, h, m, n, R):
    """Direct evaluation of the displayed bootstrap process on every grid cell."""
    T, D = coef.shape
    n_t = T - h
    mu = np.zeros((n_t, D, D))
    for t in range(1, n_t + 1):
        hi = min(n, T - t - h)
        lo = max(-n, 1 - t)
        for j in range(lo, hi + 1):
            mu[t - 1] += np.outer(coef[t + j - 1], coef[t + j + h - 1])
        mu[t - 1] /= hi - lo + 1
    B = np.zeros((T, D, D))
    for s in range(T):
        for i in range(1, min(s, n_t) + 1):
            block = np.zeros((D, D))
            for t in range(i, min(i + m - 1, n_t) + 1):
                block += np.outer(coef[t - 1], coef[t + h - 1]) - mu[t - 1]
            B[s] += R[i - 1] / np.sqrt(m) * block
        B[s] /= np.sqrt(T)
    A = brute_force_path(coef, h)
    norm_sq = np.sum(B**2) / T
    inner = np.sum(A * B) / T
    return norm_sq, inner, mu


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
