"""Uniform midpoint grids on [0, 1], L2 quadrature and the Fourier basis."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Grid1D",
    "FunctionalSeries",
    "CoefficientSeries",
    "make_uniform_grid",
    "l2_inner_grid",
    "fourier_basis_eval",
    "fourier_basis_matrix",
    "project_fourier",
    "reconstruct_fourier",
]


@dataclass(frozen=True)
class Grid1D:
    """Midpoint grid ``tau_j = (j - 1/2) / m`` with quadrature weight ``1/m``."""

    m: int

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise ValueError(f"grid size must be a positive integer, got {self.m!r}")

    @property
    def points(self) -> np.ndarray:
        return (np.arange(self.m, dtype=float) + 0.5) / self.m

    @property
    def weight(self) -> float:
        return 1.0 / self.m


@dataclass(frozen=True)
class FunctionalSeries:
    """``T`` curves sampled on a shared grid; row ``t`` holds ``X_t`` on the grid."""

    values: np.ndarray
    grid: Grid1D

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2:
            raise ValueError("values must be a T x m matrix")
        if values.shape[0] < 1:
            raise ValueError("a functional series needs at least one curve")
        if values.shape[1] != self.grid.m:
            raise ValueError(
                f"curves have {values.shape[1]} points but the grid has {self.grid.m}"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("functional series contains non-finite values")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def T(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class CoefficientSeries:
    """``T`` x ``D`` matrix of basis coefficients, one row per curve."""

    coef: np.ndarray

    def __post_init__(self):
        coef = np.ascontiguousarray(self.coef, dtype=float)
        if coef.ndim != 2 or coef.shape[0] < 1 or coef.shape[1] < 1:
            raise ValueError("coef must be a non-empty T x D matrix")
        if not np.all(np.isfinite(coef)):
            raise ValueError("coefficient series contains non-finite values")
        coef.setflags(write=False)
        object.__setattr__(self, "coef", coef)

    @property
    def T(self) -> int:
        return self.coef.shape[0]

    @property
    def D(self) -> int:
        return self.coef.shape[1]

    def scaled(self, c: float) -> "CoefficientSeries":
        return CoefficientSeries(c * self.coef)


def make_uniform_grid(m: int) -> Grid1D:
    return Grid1D(m)


def l2_inner_grid(f, g, grid: Grid1D) -> float:
    """Midpoint-rule approximation of the L2 inner product on [0, 1]."""
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    if f.shape != (grid.m,) or g.shape != (grid.m,):
        raise ValueError(
            f"grid functions must have shape ({grid.m},), got {f.shape} and {g.shape}"
        )
    return float(np.dot(f, g) / grid.m)


def fourier_basis_eval(n: int, tau):
    """Evaluate the ``n``-th orthonormal Fourier function at ``tau``.

    ``psi_0 = 1``, ``psi_{2k-1} = sqrt(2) sin(2 pi k tau)`` and
    ``psi_{2k} = sqrt(2) cos(2 pi k tau)``.
    """
    if n < 0:
        raise ValueError("basis index must be nonnegative")
    tau = np.asarray(tau, dtype=float)
    if n == 0:
        out = np.ones_like(tau)
    else:
        k = (n + 1) // 2
        trig = np.sin if n % 2 == 1 else np.cos
        out = np.sqrt(2.0) * trig(2.0 * np.pi * k * tau)
    return float(out) if out.ndim == 0 else out


def fourier_basis_matrix(D: int, grid: Grid1D) -> np.ndarray:
    """``D`` x ``m`` matrix whose row ``d`` is ``psi_d`` on the grid."""
    if D < 1:
        raise ValueError("basis dimension must be positive")
    tau = grid.points
    return np.stack([fourier_basis_eval(d, tau) for d in range(D)])


def project_fourier(series: FunctionalSeries, D: int = 17) -> CoefficientSeries:
    """Coefficients ``<X_t, psi_d>`` for ``d < D`` by grid quadrature."""
    basis = fourier_basis_matrix(D, series.grid)
    return CoefficientSeries(series.values @ basis.T / series.grid.m)


def reconstruct_fourier(coef: CoefficientSeries, grid: Grid1D) -> FunctionalSeries:
    basis = fourier_basis_matrix(coef.D, grid)
    return FunctionalSeries(coef.coef @ basis, grid)
