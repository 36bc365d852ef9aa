import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import brute_force_bootstrap
from fportmanteau.bootstrap import (
    BootstrapConfig,
    bootstrap_replicate,
    default_block_length,
    derive_seed,
    local_bandwidth,
    local_product_moment,
    replicate_multipliers,
    run_portmanteau_test,
    run_relevant_test,
)
from fportmanteau.grid import CoefficientSeries


def ones_series(T, D=3):
    coef = np.zeros((T, D))
    coef[:, 0] = 1.0
    return CoefficientSeries(coef)


class TestLocalProductMoment:
    def test_global_window_is_global_mean(self, rng):
        coef = rng.standard_normal((15, 3))
        T, h = 15, 2
        global_mean = coef[: T - h].T @ coef[h:] / (T - h)
        for t in range(1, T - h + 1):
            np.testing.assert_allclose(local_product_moment(coef, h, "global", t), global_mean, rtol=1e-12)
            np.testing.assert_allclose(local_product_moment(coef, h, T, t), global_mean, rtol=1e-12)

    def test_constant_curves(self):
        expected = np.zeros((3, 3))
        expected[0, 0] = 1.0
        for t, h, n in [(1, 1, 1), (4, 2, 3), (7, 1, "global")]:
            np.testing.assert_allclose(local_product_moment(ones_series(9), h, n, t), expected)

    def test_hand_unrolled_window(self, rng):
        a = rng.standard_normal((5, 2))
        # rows are 1-based in the formula: (a2 a3' + a3 a4' + a4 a5') / 3
        expected = (np.outer(a[1], a[2]) + np.outer(a[2], a[3]) + np.outer(a[3], a[4])) / 3
        np.testing.assert_allclose(local_product_moment(a, 1, 1, 3), expected, rtol=1e-14)

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            local_product_moment(ones_series(5), 1, 2, 5)
        with pytest.raises(ValueError):
            local_product_moment(ones_series(5), 1, 2, 0)


class TestBlockAndBandwidth:
    @pytest.mark.parametrize("T, m", [(128, 5), (1024, 10), (1, 1), (1000, 10), (27, 3), (26, 2)])
    def test_default_block_length(self, T, m):
        assert default_block_length(T) == m

    @pytest.mark.parametrize("T, n", [(256, 40), (128, 25), (1000, 100), (8, 4)])
    def test_local_bandwidth(self, T, n):
        assert local_bandwidth(T) == n

    @given(st.integers(1, 10**6))
    def test_block_length_bounds(self, T):
        m = default_block_length(T)
        assert 1 <= m <= T and m**3 <= T < (m + 1) ** 3

    def test_config_validation(self):
        with pytest.raises(ValueError):
            BootstrapConfig(K=0)
        with pytest.raises(ValueError):
            BootstrapConfig(alpha=1.0)
        with pytest.raises(ValueError):
            BootstrapConfig(bandwidth_n="local")
        with pytest.raises(ValueError):
            BootstrapConfig(block_m=0)
        with pytest.raises(ValueError):
            BootstrapConfig(block_m=20).block_length(10)
        with pytest.raises(ValueError):
            BootstrapConfig(bandwidth_n=50).bandwidth(10)


class TestReplicate:
    def test_zero_multipliers(self, rng):
        pairs = bootstrap_replicate(rng.standard_normal((20, 3)), 3, BootstrapConfig(), np.zeros(20))
        assert pairs == [(0.0, 0.0)] * 3

    def test_constant_products_global_centering(self, rng):
        pairs = bootstrap_replicate(ones_series(30), 4, BootstrapConfig(), rng.standard_normal(30))
        for norm, inner in pairs:
            assert norm == 0.0 and inner == 0.0

    def test_matches_direct_formula(self, rng):
        coef = rng.standard_normal((25, 3))
        R = rng.standard_normal(25)
        cfg = BootstrapConfig(block_m=4, bandwidth_n=6)
        pairs = bootstrap_replicate(coef, 2, cfg, R)
        for h, (norm, inner) in enumerate(pairs, 1):
            e_norm_sq, e_inner, _ = brute_force_bootstrap(coef, h, 4, 6, R)
            assert norm == pytest.approx(math.sqrt(e_norm_sq), rel=1e-10)
            assert inner == pytest.approx(e_inner, rel=1e-10)

    @settings(max_examples=20, deadline=None)
    @given(st.floats(-50, 50), st.integers(0, 2**32 - 1))
    def test_linear_in_multipliers(self, lam, seed):
        rng = np.random.default_rng(seed)
        coef = rng.standard_normal((30, 3))
        R = rng.standard_normal(30)
        cfg = BootstrapConfig(block_m=3, bandwidth_n=5)
        base = bootstrap_replicate(coef, 2, cfg, R)
        scaled = bootstrap_replicate(coef, 2, cfg, lam * R)
        for (n0, i0), (n1, i1) in zip(base, scaled):
            assert n1 == pytest.approx(abs(lam) * n0, rel=1e-10, abs=1e-12)
            assert i1 == pytest.approx(lam * i0, rel=1e-10, abs=1e-12)

    def test_short_multipliers(self, rng):
        with pytest.raises(ValueError):
            bootstrap_replicate(rng.standard_normal((10, 2)), 1, BootstrapConfig(), np.ones(9))

    def test_block_too_long(self, rng):
        with pytest.raises(ValueError):
            bootstrap_replicate(rng.standard_normal((10, 2)), 1, BootstrapConfig(block_m=11), np.ones(10))


class TestMultipliers:
    def test_replicate_depends_only_on_seed_and_index(self):
        a = replicate_multipliers(7, 5, 40)
        b = replicate_multipliers(7, 9, 40)
        np.testing.assert_array_equal(a, b[:5])
        assert not np.array_equal(a[0], a[1])

    def test_derived_seeds_distinct(self):
        seeds = {derive_seed(1, r, j) for r in range(50) for j in range(2)}
        assert len(seeds) == 100
        assert derive_seed(1, 3, 0) == derive_seed(1, 3, 0)


class TestPortmanteau:
    def test_deterministic(self, rng):
        coef = rng.standard_normal((60, 5))
        cfg = BootstrapConfig(K=50, master_seed=11)
        a = run_portmanteau_test(coef, 3, cfg)
        b = run_portmanteau_test(coef, 3, cfg)
        np.testing.assert_array_equal(a.boot_norms, b.boot_norms)
        np.testing.assert_array_equal(a.boot_inner, b.boot_inner)
        assert a.p_classical == b.p_classical

    def test_scaling_invariance(self, rng):
        coef = rng.standard_normal((80, 5))
        cfg = BootstrapConfig(K=100, master_seed=3)
        a = run_portmanteau_test(coef, 4, cfg)
        b = run_portmanteau_test(CoefficientSeries(coef).scaled(3.0), 4, cfg)
        np.testing.assert_allclose(b.observed.S, 9 * a.observed.S, rtol=1e-12)
        np.testing.assert_allclose(b.boot_norms, 9 * a.boot_norms, rtol=1e-12)
        np.testing.assert_array_equal(a.p_classical_by_lag(), b.p_classical_by_lag())

    def test_p_values_on_lattice(self, rng):
        res = run_portmanteau_test(rng.standard_normal((50, 3)), 4, BootstrapConfig(K=40))
        p = res.p_classical_by_lag()
        assert np.all((p >= 0) & (p <= 1))
        np.testing.assert_allclose(p * 40, np.round(p * 40), atol=1e-12)
        assert res.reject == (res.p_classical < res.alpha)

    def test_strong_dependence_rejected(self, rng):
        e = rng.standard_normal((300, 3))
        x = np.zeros_like(e)
        for t in range(1, 300):
            x[t] = 0.8 * x[t - 1] + e[t]
        res = run_portmanteau_test(x, 2, BootstrapConfig(K=100))
        assert res.p_classical == 0.0 and res.reject

    def test_H_must_be_below_T(self):
        with pytest.raises(ValueError):
            run_portmanteau_test(ones_series(4), 4, BootstrapConfig(K=5))


class TestRelevant:
    def test_zero_series(self):
        res = run_relevant_test(CoefficientSeries(np.zeros((20, 3))), 2, [0.1, 0.1], BootstrapConfig(K=30))
        assert res.relevant.max_stat == 0
        assert np.all(res.boot_inner == 0)
        assert res.p_relevant == 1.0 and not res.reject

    def test_alpha_restriction(self, rng):
        with pytest.raises(ValueError):
            run_relevant_test(rng.standard_normal((20, 2)), 1, [0.1], BootstrapConfig(alpha=0.5))

    def test_threshold_validation(self, rng):
        with pytest.raises(ValueError):
            run_relevant_test(rng.standard_normal((20, 2)), 2, [0.1], BootstrapConfig())
        with pytest.raises(ValueError):
            run_relevant_test(rng.standard_normal((20, 2)), 1, [0.0], BootstrapConfig())

    def test_large_threshold_accepts(self, rng):
        e = rng.standard_normal((200, 3))
        x = np.zeros_like(e)
        for t in range(1, 200):
            x[t] = 0.5 * x[t - 1] + e[t]
        big = run_relevant_test(x, 1, [100.0], BootstrapConfig(K=100))
        small = run_relevant_test(x, 1, [1e-3], BootstrapConfig(K=100))
        assert not big.reject and small.reject
