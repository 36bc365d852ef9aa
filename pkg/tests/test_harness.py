import logging
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from fportmanteau.bootstrap import BootstrapConfig, derive_seed
from fportmanteau.grid import Grid1D, project_fourier
from fportmanteau.harness import (
    REFERENCE_NORMS,
    CurveParseError,
    McReport,
    _rate_row,
    demean,
    estimate_norm_table,
    intraday_returns,
    load_curves,
    load_norm_table,
    mc_rejection_rates,
    resolve_threads,
    write_curves,
    write_norm_table,
)
from fportmanteau.lagcov import lagcov_norms
from fportmanteau.simmodels import ModelSpec, gen_model


def _write(tmp_path, text, name="curves.tsv"):
    p = tmp_path / name
    p.write_text(text)
    return p


class TestLoadCurves:
    def test_plain_table(self, tmp_path):
        p = _write(tmp_path, "1\t2\t3\t4\n5\t6\t7\t8\n9\t10\t11\t12\n")
        table = load_curves(p)
        assert table.values.shape == (3, 4)
        assert table.values[2, 3] == 12.0
        assert table.labels is None and table.header is None and table.dropped == []

    def test_header_and_labels_detected(self, tmp_path):
        p = _write(tmp_path, "date,a,b\n2020-01-02,1.5,2\n2020-01-03,3,4.25\n", "c.csv")
        table = load_curves(p)
        assert table.header == ["date", "a", "b"]
        assert table.labels == ["2020-01-02", "2020-01-03"]
        np.testing.assert_array_equal(table.values, [[1.5, 2.0], [3.0, 4.25]])

    def test_bad_row_dropped_with_warning(self, tmp_path, caplog):
        p = _write(tmp_path, "1\t2\t3\n4\tNA\t6\n7\t8\t9\n")
        with caplog.at_level(logging.WARNING):
            table = load_curves(p)
        assert table.T == 2
        assert table.dropped == [2]
        assert "line 2" in caplog.text

    def test_bad_row_strict(self, tmp_path):
        p = _write(tmp_path, "1\t2\t3\n4\tNA\t6\n")
        with pytest.raises(CurveParseError, match="line 2"):
            load_curves(p, on_bad_row="error")

    def test_nonfinite_is_bad(self, tmp_path):
        p = _write(tmp_path, "1\t2\n3\tinf\n5\t6\n")
        assert load_curves(p).dropped == [2]

    def test_ragged_raises(self, tmp_path):
        p = _write(tmp_path, "1\t2\t3\n4\t5\n")
        with pytest.raises(CurveParseError, match="columns"):
            load_curves(p)

    def test_missing_and_empty(self, tmp_path):
        with pytest.raises(CurveParseError):
            load_curves(tmp_path / "nope.tsv")
        with pytest.raises(CurveParseError):
            load_curves(_write(tmp_path, "\n\n"))

    def test_roundtrip_simulated(self, tmp_path):
        x = gen_model(ModelSpec("N1", 16, Grid1D(30), seed=3)).values
        p = tmp_path / "n1.tsv"
        write_curves(p, x, labels=[f"d{t}" for t in range(16)])
        table = load_curves(p)
        np.testing.assert_allclose(table.values, x, rtol=0, atol=1e-12)
        assert table.labels[0] == "d0"

    @settings(max_examples=40, deadline=None)
    @given(arrays(np.float64, st.tuples(st.integers(1, 5), st.integers(1, 6)),
                  elements=st.floats(-1e6, 1e6, allow_nan=False)))
    def test_roundtrip_exact(self, tmp_path_factory, x):
        p = tmp_path_factory.mktemp("rt") / "x.tsv"
        write_curves(p, x)
        np.testing.assert_array_equal(load_curves(p, header=False, labels=False).values, x)


class TestIntradayReturns:
    def test_known_values(self):
        P = np.array([[100.0, 200.0, 50.0], [7.0, 7.0, 7.0]])
        r = intraday_returns(P)
        np.testing.assert_allclose(r[:, 0], 0.0)
        assert r[0, 1] == pytest.approx(100 * math.log(2), abs=1e-12)
        assert r[0, 1] == pytest.approx(69.3147, abs=1e-4)
        assert r[0, 2] == pytest.approx(-69.3147, abs=1e-4)
        np.testing.assert_array_equal(r[1], 0.0)

    @pytest.mark.parametrize("bad", [0.0, -1.0, np.nan])
    def test_nonpositive(self, bad):
        P = np.ones((3, 4))
        P[2, 1] = bad
        with pytest.raises(ValueError, match="row 3, column 2"):
            intraday_returns(P)

    @settings(max_examples=50, deadline=None)
    @given(arrays(np.float64, (3, 5), elements=st.floats(0.01, 1e4)),
           st.floats(0.01, 100.0))
    def test_scale_invariant(self, P, c):
        np.testing.assert_allclose(intraday_returns(c * P), intraday_returns(P), atol=1e-9)


class TestDemean:
    def test_modes(self, rng):
        x = rng.standard_normal((20, 4)) + 3.0
        np.testing.assert_array_equal(demean(x, "none"), x)
        np.testing.assert_allclose(demean(x, "global").mean(axis=0), 0.0, atol=1e-12)
        # window covering everything equals global demeaning
        np.testing.assert_allclose(demean(x, "local:20"), demean(x, "global"), atol=1e-12)
        np.testing.assert_allclose(demean(x, "local:0"), 0.0, atol=1e-12)

    def test_local_window(self, rng):
        x = rng.standard_normal((9, 2))
        out = demean(x, "local:2")
        for t in range(9):
            lo, hi = max(t - 2, 0), min(t + 2, 8)
            np.testing.assert_allclose(out[t], x[t] - x[lo:hi + 1].mean(axis=0), atol=1e-12)

    def test_unknown(self):
        with pytest.raises(ValueError):
            demean(np.zeros((2, 2)), "median")


class TestThreads:
    def test_env(self, monkeypatch):
        monkeypatch.setenv("FPORTMANTEAU_THREADS", "3")
        assert resolve_threads() == 3
        assert resolve_threads(2) == 2
        with pytest.raises(ValueError):
            resolve_threads(0)


class TestMc:
    def test_rate_row_standard_error(self):
        row = _rate_row(np.array([True] * 25 + [False] * 75), 2, "classical", None)
        assert row["rate"] == pytest.approx(25.0)
        assert row["se"] == pytest.approx(100 * math.sqrt(0.25 * 0.75 / 100))
        assert row["H"] == 2

    def test_report_lookup(self):
        rep = McReport("N1", 64, 1, 10, "global", 4, 64, 0.05, 5, 5, 20)
        rep.rows.append(dict(test="classical", w=None, H=1, rate=20.0, se=1.0))
        assert rep.rate(1) == 20.0
        with pytest.raises(KeyError):
            rep.rate(2)
        assert rep.records()[0]["model"] == "N1"

    def test_threads_do_not_change_results(self):
        kw = dict(reps=6, cfg=BootstrapConfig(K=20, master_seed=4), weights=[0.5, 1.0],
                  D=5, grid_m=20, burn_in=10)
        a = mc_rejection_rates("A1", 40, 2, threads=1, **kw)
        b = mc_rejection_rates("A1", 40, 2, threads=2, **kw)
        assert a.rows == b.rows
        assert len(a.rows) == 2 + 2 * 2

    def test_argument_checks(self):
        with pytest.raises(ValueError):
            mc_rejection_rates("N1", 20, 0, reps=1)
        with pytest.raises(ValueError):
            mc_rejection_rates("N1", 20, 1, reps=1, weights=[1.0])  # no reference table
        with pytest.raises(ValueError):
            mc_rejection_rates("A1", 20, 1, reps=1, weights=[1.0],
                               cfg=BootstrapConfig(alpha=0.5))


class TestNormTable:
    def test_matches_direct_loop(self):
        means, var = estimate_norm_table("A1", T=30, D=5, reps=4, H=2, grid_m=20, burn_in=5, seed=2)
        direct = np.array([
            lagcov_norms(project_fourier(gen_model(
                ModelSpec("A1", 30, Grid1D(20), 5, derive_seed(2, r, 0))), 5).coef, 2)
            for r in range(4)
        ])
        np.testing.assert_allclose(means, direct.mean(axis=0), rtol=1e-12)
        np.testing.assert_allclose(var, direct.var(axis=0, ddof=1), rtol=1e-10)

    def test_single_rep_has_zero_variance(self):
        _, var = estimate_norm_table("N1", T=10, D=3, reps=1, H=2, grid_m=10, burn_in=0)
        np.testing.assert_array_equal(var, 0.0)

    def test_file_roundtrip(self, tmp_path):
        p = tmp_path / "norms.tsv"
        write_norm_table(p, REFERENCE_NORMS["A3"], [1e-4] * 4)
        np.testing.assert_array_equal(load_norm_table(p), REFERENCE_NORMS["A3"])
        write_norm_table(p, [0.5, 0.25])
        np.testing.assert_array_equal(load_norm_table(p), [0.5, 0.25])
