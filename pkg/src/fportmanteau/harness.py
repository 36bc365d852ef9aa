"""Curve file I/O, intraday-return preprocessing and the Monte Carlo study runner."""

from __future__ import annotations

import csv
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from threadpoolctl import threadpool_limits

from .bootstrap import BootstrapConfig, bootstrap_lag_stats, derive_seed, replicate_multipliers
from .grid import FunctionalSeries, Grid1D, project_fourier
from .lagcov import lagcov_norms
from .simmodels import KERNEL_HS, ModelSpec, gen_model

__all__ = [
    "CurveParseError",
    "CurveTable",
    "McReport",
    "REFERENCE_NORMS",
    "THREADS_ENV",
    "load_curves",
    "write_curves",
    "intraday_returns",
    "demean",
    "mc_rejection_rates",
    "estimate_norm_table",
    "load_norm_table",
    "write_norm_table",
    "resolve_threads",
]

log = logging.getLogger(__name__)

THREADS_ENV = "FPORTMANTEAU_THREADS"

# Monte Carlo means of the lag-h norms (h = 1..4), T = 2000, D = 101, 10^4 series
REFERENCE_NORMS = {
    "A1": (0.1419, 0.0689, 0.0336, 0.0169),
    "A2": (0.0283, 0.0138, 0.0069, 0.0037),
    "A3": (0.1996, 0.1220, 0.0755, 0.0468),
    "A4": (0.0235, 0.0117, 0.0070, 0.0048),
}


class CurveParseError(ValueError):
    pass


@dataclass
class CurveTable:
    values: np.ndarray
    labels: Optional[list] = None
    header: Optional[list] = None
    dropped: list = field(default_factory=list)

    @property
    def T(self) -> int:
        return self.values.shape[0]

    @property
    def m(self) -> int:
        return self.values.shape[1]

    def to_series(self) -> FunctionalSeries:
        return FunctionalSeries(self.values, Grid1D(self.m))


def _is_number(s: str) -> bool:
    try:
        return math.isfinite(float(s))
    except ValueError:
        return False


def _sniff_delimiter(sample: str) -> str:
    first = next((line for line in sample.splitlines() if line.strip()), "")
    return "\t" if "\t" in first else ","


def load_curves(
    path,
    delimiter: Optional[str] = None,
    header: Optional[bool] = None,
    labels: Optional[bool] = None,
    on_bad_row: str = "drop",
) -> CurveTable:
    """Read one curve per row from delimited text.

    ``header`` and ``labels`` (a leading label column) are detected when left
    as ``None``.  Rows with non-numeric or non-finite cells are dropped with a
    warning (``on_bad_row="drop"``) or raise :class:`CurveParseError`
    (``"error"``).  Ragged rows always raise.
    """
    if on_bad_row not in ("drop", "error"):
        raise ValueError("on_bad_row must be 'drop' or 'error'")
    try:
        with open(path, newline="") as fh:
            text = fh.read()
    except OSError as exc:
        raise CurveParseError(f"cannot read {path}: {exc}") from exc
    if delimiter is None:
        delimiter = _sniff_delimiter(text)
    rows = [
        (lineno, [c.strip() for c in row])
        for lineno, row in enumerate(csv.reader(text.splitlines(), delimiter=delimiter), 1)
        if row and any(c.strip() for c in row)
    ]
    if not rows:
        raise CurveParseError(f"{path}: no data")

    if labels is None:
        body = rows[1:] if len(rows) > 1 else rows
        labels = all(not _is_number(r[0]) for _, r in body)
    skip = 1 if labels else 0
    if header is None:
        header = not any(_is_number(c) for c in rows[0][1][skip:])
    head = rows[0][1] if header else None
    if header:
        rows = rows[1:]

    width = len(head) if head is not None else (len(rows[0][1]) if rows else 0)
    values, row_labels, dropped = [], [], []
    for lineno, row in rows:
        if len(row) != width:
            raise CurveParseError(
                f"{path}: line {lineno} has {len(row)} columns, expected {width}"
            )
        cells = row[skip:]
        bad = next((j for j, c in enumerate(cells) if not _is_number(c)), None)
        if bad is not None:
            msg = f"{path}: line {lineno}, column {bad + skip + 1}: cannot parse {cells[bad]!r}"
            if on_bad_row == "error":
                raise CurveParseError(msg)
            log.warning("dropping row (%s)", msg)
            dropped.append(lineno)
            continue
        values.append([float(c) for c in cells])
        if labels:
            row_labels.append(row[0])
    if not values or width - skip < 1:
        raise CurveParseError(f"{path}: no complete curves")
    return CurveTable(
        values=np.array(values),
        labels=row_labels if labels else None,
        header=head,
        dropped=dropped,
    )


def write_curves(path, values, labels: Optional[Sequence] = None, delimiter: str = "\t") -> None:
    values = np.asarray(values, dtype=float)
    with open(path, "w", newline="") as fh:
        for t, row in enumerate(values):
            cells = [repr(float(v)) for v in row]
            if labels is not None:
                cells.insert(0, str(labels[t]))
            fh.write(delimiter.join(cells) + "\n")


def intraday_returns(prices) -> np.ndarray:
    """Cumulative intraday log returns in percent, relative to the first column."""
    P = np.asarray(prices.values if isinstance(prices, CurveTable) else prices, dtype=float)
    bad = np.argwhere(~(P > 0))
    if bad.size:
        t, j = bad[0]
        raise ValueError(f"nonpositive price {P[t, j]!r} at row {t + 1}, column {j + 1}")
    logp = np.log(P)
    return 100.0 * (logp - logp[:, :1])


def demean(values, mode: str = "none") -> np.ndarray:
    """``"none"``, ``"global"`` (subtract the mean curve) or ``"local:n"``
    (subtract the mean over rows ``t-n..t+n``)."""
    values = np.asarray(values, dtype=float)
    if mode == "none":
        return values
    if mode == "global":
        return values - values.mean(axis=0)
    if mode.startswith("local:"):
        n = int(mode.split(":", 1)[1])
        if n < 0:
            raise ValueError("local demeaning window must be nonnegative")
        T = values.shape[0]
        cs = np.vstack([np.zeros(values.shape[1]), np.cumsum(values, axis=0)])
        t = np.arange(T)
        lo, hi = np.maximum(t - n, 0), np.minimum(t + n, T - 1) + 1
        return values - (cs[hi] - cs[lo]) / (hi - lo)[:, None]
    raise ValueError(f"unknown demeaning mode {mode!r}")


def resolve_threads(threads: Optional[int] = None) -> int:
    if threads is None:
        threads = int(os.environ.get(THREADS_ENV, "1"))
    if threads < 1:
        raise ValueError("thread count must be positive")
    return threads


def _map(fn, tasks, threads: int):
    """Ordered map; results do not depend on the worker count."""
    if threads == 1 or len(tasks) < 2:
        with threadpool_limits(1):
            return [fn(t) for t in tasks]
    chunk = max(1, len(tasks) // (4 * threads))
    with ProcessPoolExecutor(threads, initializer=_worker_init) as pool:
        return list(pool.map(fn, tasks, chunksize=chunk))


def _worker_init():
    threadpool_limits(1)


@dataclass
class McReport:
    """Rejection percentages by maximal lag, one row per hypothesis."""

    model: str
    T: int
    H_max: int
    K: int
    bandwidth: str
    m: int
    n: int
    alpha: float
    reps: int
    D: int
    grid_m: int
    kernel_hs: float = KERNEL_HS
    rows: list = field(default_factory=list)

    def rate(self, H: int, test: str = "classical", w: Optional[float] = None) -> float:
        for row in self.rows:
            if row["H"] == H and row["test"] == test and row["w"] == w:
                return row["rate"]
        raise KeyError((H, test, w))

    def records(self) -> list:
        meta = dict(model=self.model, T=self.T, K=self.K, m=self.m, n=self.n,
                    bandwidth=self.bandwidth, alpha=self.alpha, reps=self.reps,
                    D=self.D, grid_m=self.grid_m)
        return [{**meta, **row} for row in self.rows]


def _rate_row(rejections: np.ndarray, H: int, test: str, w: Optional[float]) -> dict:
    reps = len(rejections)
    p = float(np.mean(rejections))
    return dict(test=test, w=w, H=H, rate=100.0 * p, se=100.0 * math.sqrt(p * (1 - p) / reps))


def _mc_rep(task):
    (model, T, grid_m, burn_in, hs, D, H, K, m, n, alpha, seed, rep, weights, norms) = task
    spec = ModelSpec(model, T, Grid1D(grid_m), burn_in, derive_seed(seed, rep, 0), hs)
    coef = project_fourier(gen_model(spec), D).coef
    R = replicate_multipliers(derive_seed(seed, rep, 1), K, T)
    obs, boot_norms, boot_inner = bootstrap_lag_stats(coef, H, m, n, R)
    S = math.sqrt(T) * np.maximum.accumulate(obs)
    p_cls = np.mean(np.maximum.accumulate(boot_norms, axis=1) >= S, axis=0)
    rel = []
    if weights:
        boot_rel = np.maximum.accumulate(boot_inner, axis=1)
        for w in weights:
            delta = w * np.asarray(norms[:H])
            S_rel = np.maximum.accumulate(math.sqrt(T) * (obs - delta) * obs)
            rel.append(np.mean(boot_rel >= S_rel, axis=0) < alpha)
    return p_cls < alpha, np.array(rel, dtype=bool).reshape(len(weights or ()), H)


def mc_rejection_rates(
    model: str,
    T: int,
    H_max: int = 4,
    reps: int = 1000,
    cfg: BootstrapConfig = BootstrapConfig(),
    weights: Optional[Sequence[float]] = None,
    norm_table: Optional[Sequence[float]] = None,
    D: int = 17,
    grid_m: int = 1000,
    burn_in: int = 100,
    kernel_hs: float = KERNEL_HS,
    threads: Optional[int] = None,
) -> McReport:
    """Empirical rejection rates (percent) of the classical test for ``H = 1..H_max``,
    and of the relevant test with ``delta_h = w * norm_table[h]`` for each weight."""
    if reps < 1:
        raise ValueError("reps must be positive")
    if H_max < 1 or H_max >= T:
        raise ValueError("need 1 <= H_max < T")
    if weights:
        if cfg.alpha >= 0.5:
            raise ValueError("the relevant test requires alpha < 1/2")
        if norm_table is None:
            if model not in REFERENCE_NORMS:
                raise ValueError(f"no reference norm table for model {model}")
            norm_table = REFERENCE_NORMS[model]
        if len(norm_table) < H_max:
            raise ValueError(f"norm table has {len(norm_table)} lags, need {H_max}")
        norm_table = tuple(float(v) for v in norm_table)
        if min(weights) <= 0 or min(norm_table[:H_max]) <= 0:
            raise ValueError("relevance thresholds must be strictly positive")
    m, n = cfg.block_length(T), cfg.bandwidth(T)
    if cfg.bandwidth_n != "global" and not m < n < T:
        log.warning("block length m=%d and bandwidth n=%d do not satisfy m < n < T=%d", m, n, T)
    weights = tuple(float(w) for w in weights) if weights else ()
    tasks = [
        (model, T, grid_m, burn_in, kernel_hs, D, H_max, cfg.K, m, n, cfg.alpha, cfg.master_seed, r,
         weights, norm_table)
        for r in range(reps)
    ]
    results = _map(_mc_rep, tasks, resolve_threads(threads))
    cls = np.array([r[0] for r in results])
    report = McReport(model, T, H_max, cfg.K, str(cfg.bandwidth_n), m, n, cfg.alpha, reps, D, grid_m,
                      kernel_hs)
    for H in range(1, H_max + 1):
        report.rows.append(_rate_row(cls[:, H - 1], H, "classical", None))
    if weights:
        rel = np.array([r[1] for r in results])
        for i, w in enumerate(weights):
            for H in range(1, H_max + 1):
                report.rows.append(_rate_row(rel[:, i, H - 1], H, "relevant", w))
    return report


def _norm_rep(task):
    model, T, grid_m, burn_in, hs, D, H, seed, rep = task
    spec = ModelSpec(model, T, Grid1D(grid_m), burn_in, derive_seed(seed, rep, 0), hs)
    return lagcov_norms(project_fourier(gen_model(spec), D).coef, H)


def estimate_norm_table(
    model: str,
    T: int = 2000,
    D: int = 101,
    reps: int = 10000,
    H: int = 4,
    grid_m: int = 1000,
    burn_in: int = 100,
    seed: int = 0,
    kernel_hs: float = KERNEL_HS,
    threads: Optional[int] = None,
):
    """Monte Carlo mean and variance of the lag-``h`` norm for ``h = 1..H``."""
    if reps < 1:
        raise ValueError("reps must be positive")
    tasks = [(model, T, grid_m, burn_in, kernel_hs, D, H, seed, r) for r in range(reps)]
    norms = np.array(_map(_norm_rep, tasks, resolve_threads(threads)))
    var = norms.var(axis=0, ddof=1) if reps > 1 else np.zeros(H)
    return norms.mean(axis=0), var


def write_norm_table(path, means, variances=None) -> None:
    with open(path, "w") as fh:
        fh.write("h\tmean\tvar\n")
        for h, mu in enumerate(means, 1):
            var = 0.0 if variances is None else float(variances[h - 1])
            fh.write(f"{h}\t{float(mu)!r}\t{var!r}\n")


def load_norm_table(path) -> np.ndarray:
    table = load_curves(path, delimiter="\t", header=True, labels=False, on_bad_row="error")
    order = np.argsort(table.values[:, 0])
    return table.values[order, 1]
