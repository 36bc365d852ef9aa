"""Bootstrap portmanteau tests for serial correlation in locally stationary
functional time series."""

__version__ = "0.1.0"

from .bootstrap import (
    BootstrapConfig,
    TestResult,
    default_block_length,
    local_bandwidth,
    local_product_moment,
    run_portmanteau_test,
    run_relevant_test,
)
from .grid import (
    CoefficientSeries,
    FunctionalSeries,
    Grid1D,
    fourier_basis_eval,
    l2_inner_grid,
    make_uniform_grid,
    project_fourier,
)
from .kernels import BACKEND
from .lagcov import cum_lag_cov, lagcov_norm_integral, stat_classical, stat_relevant
from .simmodels import ModelSpec, gen_model

__all__ = [
    "BACKEND",
    "BootstrapConfig",
    "CoefficientSeries",
    "FunctionalSeries",
    "Grid1D",
    "ModelSpec",
    "TestResult",
    "cum_lag_cov",
    "default_block_length",
    "fourier_basis_eval",
    "gen_model",
    "l2_inner_grid",
    "lagcov_norm_integral",
    "local_bandwidth",
    "local_product_moment",
    "make_uniform_grid",
    "project_fourier",
    "run_portmanteau_test",
    "run_relevant_test",
    "stat_classical",
    "stat_relevant",
]
