"""Cumulative lagged product-moment processes and the test statistics built on them.

All computations run on Fourier coefficients.  With an orthonormal basis the
L2 norm of a kernel on [0,1]^2 equals the Frobenius norm of its coefficient
matrix, and the integral over rescaled time ``u`` of a step function with
jumps at ``s/T`` is a finite sum, so every norm below is exact.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from . import kernels
from .grid import CoefficientSeries

__all__ = [
    "LagCovAccumulator",
    "ClassicalStats",
    "RelevantStats",
    "cum_lag_cov",
    "lagcov_norm_integral",
    "lagcov_norms",
    "stat_classical",
    "stat_relevant",
    "relevant_from_norms",
]


class LagCovAccumulator:
    """Streaming form of the cumulative lag-``h`` process.

    Coefficient rows are fed one at a time with :meth:`push`.  Once row
    ``s + h`` has arrived the partial sum ``A_s = (1/T) sum_{t <= s} a_t a_{t+h}'``
    is known, and ``norm_integral`` holds ``(1/T) sum ||A_{s'}||_F^2`` over the
    grid cells settled so far.  After all ``T`` rows it equals the squared
    ``(u, tau1, tau2)`` norm of the process.
    """

    def __init__(self, T: int, D: int, h: int):
        if h < 1:
            raise ValueError("lag must be positive")
        self.T, self.D, self.h = T, D, h
        self.A = np.zeros((D, D))
        self.s = 0
        self.rows = 0
        self.norm_integral = 0.0
        self._pending = deque()

    def push(self, row) -> None:
        if self.rows >= self.T:
            raise ValueError("accumulator already received T rows")
        row = np.asarray(row, dtype=float)
        self.rows += 1
        self._pending.append(row)
        if len(self._pending) > self.h:
            self.norm_integral += float(np.sum(self.A * self.A)) / self.T
            self.A += np.outer(self._pending.popleft(), row) / self.T
            self.s += 1
        if self.rows == self.T:
            # A is frozen at s = T - h for the remaining cells
            cells = self.T - self.s
            self.norm_integral += cells * float(np.sum(self.A * self.A)) / self.T

    @property
    def norm(self) -> float:
        return math.sqrt(self.norm_integral)


@dataclass(frozen=True)
class ClassicalStats:
    S: np.ndarray
    norms: np.ndarray

    @property
    def H(self) -> int:
        return len(self.S)

    @property
    def max_stat(self) -> float:
        return float(np.max(self.S))


@dataclass(frozen=True)
class RelevantStats:
    delta: np.ndarray
    S_rel: np.ndarray
    norms: np.ndarray

    @property
    def max_stat(self) -> float:
        return float(np.max(self.S_rel))


def _coef(series) -> np.ndarray:
    if isinstance(series, CoefficientSeries):
        return series.coef
    return np.ascontiguousarray(series, dtype=float)


def cum_lag_cov(series, h: int, u: float) -> np.ndarray:
    """Value of the cumulative lag-``h`` process at rescaled time ``u``."""
    coef = _coef(series)
    if h < 1:
        raise ValueError("lag must be positive")
    if not 0.0 <= u <= 1.0:
        raise ValueError("u must lie in [0, 1]")
    T, D = coef.shape
    stop = min(math.floor(u * T), T - h)
    if stop <= 0:
        return np.zeros((D, D))
    return coef[:stop].T @ coef[h : h + stop] / T


def lagcov_norm_integral(series, h: int) -> tuple[float, np.ndarray]:
    """L2 norm over ``(u, tau1, tau2)`` of the lag-``h`` process and its value at ``u = 1``."""
    if h < 1:
        raise ValueError("lag must be positive")
    norm_sq, final = kernels.lagcov_path(_coef(series), h)
    return math.sqrt(max(norm_sq, 0.0)), final


def lagcov_norms(series, H: int) -> np.ndarray:
    return np.array([lagcov_norm_integral(series, h)[0] for h in range(1, H + 1)])


def stat_classical(series, H: int) -> ClassicalStats:
    coef = _coef(series)
    T = coef.shape[0]
    if H < 1 or H >= T:
        raise ValueError(f"need 1 <= H < T, got H={H}, T={T}")
    norms = lagcov_norms(coef, H)
    return ClassicalStats(S=math.sqrt(T) * norms, norms=norms)


def relevant_from_norms(norms, delta, T: int) -> RelevantStats:
    norms = np.asarray(norms, dtype=float)
    delta = np.asarray(delta, dtype=float).reshape(-1)
    if delta.shape != norms.shape:
        raise ValueError(f"need {len(norms)} thresholds, got {len(delta)}")
    if np.any(~(delta > 0)):
        raise ValueError("relevance thresholds must be strictly positive")
    S_rel = math.sqrt(T) * (norms - delta) * norms
    return RelevantStats(delta=delta, S_rel=S_rel, norms=norms)


def stat_relevant(series, H: int, delta) -> RelevantStats:
    coef = _coef(series)
    delta = np.asarray(delta, dtype=float).reshape(-1)
    if len(delta) != H:
        raise ValueError(f"need {H} thresholds, got {len(delta)}")
    if np.any(~(delta > 0)):
        raise ValueError("relevance thresholds must be strictly positive")
    classical = stat_classical(coef, H)
    return relevant_from_norms(classical.norms, delta, coef.shape[0])
