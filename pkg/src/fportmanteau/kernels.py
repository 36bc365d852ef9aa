"""Kernel backend selection.

The compiled extension is used when it was built and ``FPORTMANTEAU_PURE`` is
unset; otherwise the numpy implementation is used.  Both expose the same
functions with the same semantics.

``bootstrap_lag`` has two algorithms: a per-replicate streaming pass
(compiled, ``O(K n D^2)``) and a Gram-matrix quadratic form (numpy/BLAS,
``O(n^2 D^2 + K n^2)``).  With the compiled backend the cheaper one is picked
per call.
"""

import os

import numpy as np

from . import _kernels_py as python

try:
    from . import _ckernels as compiled
except ImportError:  # extension not built
    compiled = None

if compiled is not None and not os.environ.get("FPORTMANTEAU_PURE"):
    backend = compiled
    BACKEND = "compiled"
else:
    backend = python
    BACKEND = "python"

# streaming cost per (replicate, time, entry) relative to one Gram-path flop;
# measured with benchmarks/bench_kernels.py
STREAMING_COST = 15.0

lag_products = backend.lag_products
lagcov_path = backend.lagcov_path
local_moments = backend.local_moments
block_sums = backend.block_sums


def bootstrap_lag(products, centered, multipliers, m, T):
    n_t, P = products.shape
    K = multipliers.shape[0]
    if backend is compiled and STREAMING_COST * K * P < n_t * (P + K):
        return compiled.bootstrap_lag(products, centered, multipliers, m, T)
    return python.bootstrap_lag(products, centered, multipliers, m, T)
