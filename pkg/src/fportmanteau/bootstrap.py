"""Multiplier block bootstrap for the classical and relevant portmanteau tests."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from . import kernels
from .lagcov import ClassicalStats, RelevantStats, _coef, relevant_from_norms

__all__ = [
    "BootstrapConfig",
    "TestResult",
    "default_block_length",
    "local_bandwidth",
    "derive_seed",
    "replicate_multipliers",
    "local_product_moment",
    "bootstrap_replicate",
    "bootstrap_lag_stats",
    "run_portmanteau_test",
    "run_relevant_test",
]

log = logging.getLogger(__name__)

Bandwidth = Union[str, int]


def _int_root(x: int, k: int) -> int:
    """Largest integer ``r`` with ``r**k <= x``."""
    r = int(round(x ** (1.0 / k)))
    while r**k > x:
        r -= 1
    while (r + 1) ** k <= x:
        r += 1
    return r


def default_block_length(T: int) -> int:
    """``max(1, floor(T^(1/3)))``."""
    if T < 1:
        raise ValueError("T must be positive")
    return max(1, _int_root(T, 3))


def local_bandwidth(T: int) -> int:
    """``floor(T^(2/3))``, the centering bandwidth for locally stationary data."""
    if T < 1:
        raise ValueError("T must be positive")
    return max(1, _int_root(T * T, 3))


def derive_seed(seed: int, *keys: int) -> int:
    """Deterministic 64-bit child seed for ``(seed, *keys)``."""
    ss = np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in keys))
    return int(ss.generate_state(1, np.uint64)[0])


def replicate_multipliers(seed: int, K: int, T: int) -> np.ndarray:
    """``K`` x ``T`` standard normal multipliers; row ``k`` depends only on ``(seed, k)``."""
    out = np.empty((K, T))
    for k in range(K):
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(k,)))
        out[k] = rng.standard_normal(T)
    return out


@dataclass(frozen=True)
class BootstrapConfig:
    """Bootstrap settings.

    ``block_m=None`` selects :func:`default_block_length`.  ``bandwidth_n`` is
    ``"global"`` (centering with the full-sample mean, valid for second-order
    stationary data), ``"auto"`` (``floor(T^(2/3))``) or an explicit integer.
    """

    K: int = 200
    block_m: Optional[int] = None
    bandwidth_n: Bandwidth = "global"
    alpha: float = 0.05
    master_seed: int = 0

    def __post_init__(self):
        if self.K < 1:
            raise ValueError("number of bootstrap replicates must be positive")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        if self.block_m is not None and self.block_m < 1:
            raise ValueError("block length must be positive")
        bw = self.bandwidth_n
        if isinstance(bw, str):
            if bw not in ("global", "auto"):
                raise ValueError(f"unknown bandwidth {bw!r}")
        elif int(bw) != bw or bw < 1:
            raise ValueError("bandwidth must be a positive integer, 'global' or 'auto'")

    def block_length(self, T: int) -> int:
        m = default_block_length(T) if self.block_m is None else self.block_m
        if not 1 <= m <= T:
            raise ValueError(f"block length {m} outside [1, {T}]")
        return m

    def bandwidth(self, T: int) -> int:
        if self.bandwidth_n == "global":
            return T
        n = local_bandwidth(T) if self.bandwidth_n == "auto" else int(self.bandwidth_n)
        if not 1 <= n <= T:
            raise ValueError(f"bandwidth {n} outside [1, {T}]")
        return n


@dataclass
class TestResult:
    """Observed statistics, bootstrap replicates and decisions for lags ``1..H``.

    ``boot_norms[k, h-1]`` and ``boot_inner[k, h-1]`` are the integrated norm of
    the ``k``-th bootstrap process at lag ``h`` and its inner product with the
    observed cumulative process.
    """

    observed: ClassicalStats
    boot_norms: np.ndarray
    boot_inner: np.ndarray
    alpha: float
    relevant: Optional[RelevantStats] = None
    metadata: dict = field(default_factory=dict)

    @property
    def H(self) -> int:
        return self.observed.H

    @property
    def K(self) -> int:
        return self.boot_norms.shape[0]

    def p_classical_by_lag(self) -> np.ndarray:
        """p-value of the max-type test for every maximal lag ``1..H``."""
        obs = np.maximum.accumulate(self.observed.S)
        boot = np.maximum.accumulate(self.boot_norms, axis=1)
        return np.mean(boot >= obs, axis=0)

    def p_relevant_by_lag(self) -> np.ndarray:
        if self.relevant is None:
            raise ValueError("no relevance thresholds were supplied")
        obs = np.maximum.accumulate(self.relevant.S_rel)
        boot = np.maximum.accumulate(self.boot_inner, axis=1)
        return np.mean(boot >= obs, axis=0)

    @property
    def p_classical(self) -> float:
        return float(self.p_classical_by_lag()[-1])

    @property
    def p_relevant(self) -> Optional[float]:
        if self.relevant is None:
            return None
        return float(self.p_relevant_by_lag()[-1])

    @property
    def reject(self) -> bool:
        p = self.p_relevant if self.relevant is not None else self.p_classical
        return p < self.alpha


def local_product_moment(series, h: int, n: Bandwidth, t: int) -> np.ndarray:
    """Local mean of lag-``h`` products around time ``t`` (1-based)."""
    coef = _coef(series)
    T, D = coef.shape
    if h < 1:
        raise ValueError("lag must be positive")
    if not 1 <= t <= T - h:
        raise ValueError(f"t={t} outside [1, {T - h}]")
    n = T if n == "global" else int(n)
    hi = min(n, T - t - h)
    lo = max(-n, 1 - t)
    rows = np.arange(t + lo, t + hi + 1) - 1
    return coef[rows].T @ coef[rows + h] / (hi - lo + 1)


def bootstrap_lag_stats(coef, H: int, m: int, n: int, multipliers):
    """Observed norms (H,), bootstrap norms (K, H) and inner products (K, H)."""
    coef = np.ascontiguousarray(coef, dtype=float)
    T = coef.shape[0]
    multipliers = np.ascontiguousarray(multipliers, dtype=float)
    if multipliers.ndim == 1:
        multipliers = multipliers[None, :]
    if multipliers.shape[1] < T:
        raise ValueError("need at least T multipliers per replicate")
    if not 1 <= m <= T:
        raise ValueError(f"block length {m} outside [1, {T}]")
    K = multipliers.shape[0]
    obs = np.zeros(H)
    boot_norms = np.zeros((K, H))
    boot_inner = np.zeros((K, H))
    for h in range(1, H + 1):
        obs[h - 1] = math.sqrt(kernels.lagcov_path(coef, h)[0])
        if h >= T:
            continue
        P = kernels.lag_products(coef, h)
        Y = P - kernels.local_moments(P, n)
        norm_sq, inner = kernels.bootstrap_lag(P, Y, multipliers, m, T)
        boot_norms[:, h - 1] = np.sqrt(np.maximum(norm_sq, 0.0))
        boot_inner[:, h - 1] = inner
    return obs, boot_norms, boot_inner


def bootstrap_replicate(series, H: int, cfg: BootstrapConfig, multipliers) -> list[tuple[float, float]]:
    """Per-lag ``(norm, inner product)`` of one bootstrap process."""
    coef = _coef(series)
    T = coef.shape[0]
    multipliers = np.asarray(multipliers, dtype=float).reshape(-1)
    _, norms, inner = bootstrap_lag_stats(
        coef, H, cfg.block_length(T), cfg.bandwidth(T), multipliers[None, :]
    )
    return list(zip(norms[0].tolist(), inner[0].tolist()))


def _check_regime(cfg: BootstrapConfig, T: int, m: int, n: int) -> None:
    if cfg.bandwidth_n != "global" and not m < n < T:
        log.warning("block length m=%d and bandwidth n=%d do not satisfy m < n < T=%d", m, n, T)


def _run(series, H: int, cfg: BootstrapConfig, delta=None) -> TestResult:
    coef = _coef(series)
    T, D = coef.shape
    if H < 1 or H >= T:
        raise ValueError(f"need 1 <= H < T, got H={H}, T={T}")
    m, n = cfg.block_length(T), cfg.bandwidth(T)
    _check_regime(cfg, T, m, n)
    R = replicate_multipliers(cfg.master_seed, cfg.K, T)
    obs, boot_norms, boot_inner = bootstrap_lag_stats(coef, H, m, n, R)
    relevant = None if delta is None else relevant_from_norms(obs, delta, T)
    return TestResult(
        observed=ClassicalStats(S=math.sqrt(T) * obs, norms=obs),
        boot_norms=boot_norms,
        boot_inner=boot_inner,
        alpha=cfg.alpha,
        relevant=relevant,
        metadata=dict(T=T, D=D, H=H, m=m, n=n, K=cfg.K, seed=cfg.master_seed,
                      bandwidth=cfg.bandwidth_n, backend=kernels.BACKEND),
    )


def run_portmanteau_test(series, H: int, cfg: BootstrapConfig) -> TestResult:
    """Bootstrap test of no serial correlation up to lag ``H``."""
    return _run(series, H, cfg)


def run_relevant_test(series, H: int, delta, cfg: BootstrapConfig) -> TestResult:
    """Bootstrap test of ``||M_h|| <= delta_h`` for all ``h <= H``."""
    if cfg.alpha >= 0.5:
        raise ValueError("the relevant test requires alpha < 1/2")
    delta = np.asarray(delta, dtype=float).reshape(-1)
    if len(delta) != H:
        raise ValueError(f"need {H} thresholds, got {len(delta)}")
    return _run(series, H, cfg, delta)
