"""Command-line interface.

Exit codes: 0 success, 1 rejection in ``--ci`` mode, 2 usage error, 3 data error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np
from threadpoolctl import threadpool_limits

from . import __version__
from .bootstrap import BootstrapConfig, run_portmanteau_test, run_relevant_test
from .grid import FunctionalSeries, Grid1D, project_fourier
from .harness import (
    REFERENCE_NORMS,
    CurveParseError,
    demean,
    estimate_norm_table,
    intraday_returns,
    load_curves,
    load_norm_table,
    mc_rejection_rates,
    resolve_threads,
    write_curves,
)
from .simmodels import KERNEL_HS, MODEL_IDS, ModelSpec, gen_model

log = logging.getLogger("fportmanteau")

EXIT_OK, EXIT_REJECT, EXIT_USAGE, EXIT_DATA = 0, 1, 2, 3


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


def _bandwidth(text):
    if text in ("global", "auto"):
        return text
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("expected 'global', 'auto' or a positive integer")
    if n < 1:
        raise argparse.ArgumentTypeError("bandwidth must be positive")
    return n


def _demean_mode(text):
    if text in ("none", "global"):
        return text
    if text.startswith("local:") and text[6:].isdigit():
        return text
    raise argparse.ArgumentTypeError("expected none, global or local:N")


def _common_parser():
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("common options")
    g.add_argument("--lags", "-H", type=int, default=4, help="maximal lag H (default 4)")
    g.add_argument("--boot", "-K", type=int, default=None,
                   help="bootstrap replicates (default 1000 for test, 200 otherwise)")
    g.add_argument("--block", type=int, default=None, help="block length m (default floor(T^1/3))")
    g.add_argument("--bandwidth", type=_bandwidth, default="global",
                   help="centering bandwidth: global (n=T), auto (floor(T^2/3)) or an integer")
    g.add_argument("--alpha", type=float, default=0.05)
    g.add_argument("--delta", default=None,
                   help="relevance thresholds: 'd1,d2,...' or 'w1,w2:FILE' with FILE a norm "
                        "table or 'ref' for the built-in table")
    g.add_argument("--basis-dim", "-D", type=int, default=17)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--demean", type=_demean_mode, default="none",
                   help="none (default), global or local:N")
    g.add_argument("--threads", type=int, default=None,
                   help="worker processes (default from $FPORTMANTEAU_THREADS or 1)")
    g.add_argument("--out", choices=("tsv", "json"), default="tsv")
    g.add_argument("--output", "-o", default=None, help="write to file instead of stdout")
    g.add_argument("--verbose", "-v", action="store_true")
    return p


def _model_args(p, reps_default):
    p.add_argument("--model", required=True, choices=MODEL_IDS)
    p.add_argument("-T", type=int, required=True, help="sample length")
    p.add_argument("--grid", type=int, default=1000, help="grid size for simulation")
    p.add_argument("--burn-in", type=int, default=100)
    p.add_argument("--kernel-norm", type=float, default=KERNEL_HS,
                   help=f"Hilbert-Schmidt norm of the FAR(1) operator (default {KERNEL_HS})")
    if reps_default is not None:
        p.add_argument("--reps", type=int, default=reps_default)


def build_parser():
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog="fportmanteau",
        description="Portmanteau tests for serial correlation in locally stationary functional time series.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("test", parents=[common], help="test curves from a file")
    p.add_argument("file")
    p.add_argument("--returns", action="store_true",
                   help="treat input as prices and convert to cumulative intraday returns")
    p.add_argument("--delimiter", default=None, help="field separator (default: sniff tab/comma)")
    p.add_argument("--strict", action="store_true", help="fail on incomplete rows instead of dropping them")
    p.add_argument("--ci", action="store_true", help="exit 1 if the null hypothesis is rejected")

    p = sub.add_parser("simulate", parents=[common], help="simulate a model and write curves")
    _model_args(p, None)

    p = sub.add_parser("mc", parents=[common], help="Monte Carlo rejection rates")
    _model_args(p, 1000)

    p = sub.add_parser("norms", parents=[common], help="Monte Carlo table of lag norms")
    _model_args(p, 10000)
    return parser


def _parse_delta(text, H, model=None):
    """Return ``("explicit", thresholds)`` or ``("weights", (weights, table))``."""
    try:
        if ":" in text:
            w_text, source = text.split(":", 1)
            weights = [float(w) for w in w_text.split(",")]
            if source == "ref":
                if model not in REFERENCE_NORMS:
                    raise UsageError(f"no reference norm table for model {model}")
                table = np.array(REFERENCE_NORMS[model])
            else:
                table = load_norm_table(source)
            if len(table) < H:
                raise UsageError(f"norm table has {len(table)} lags, need {H}")
            return "weights", (weights, table[:H])
        values = [float(d) for d in text.split(",")]
    except ValueError as exc:
        raise UsageError(f"bad --delta value {text!r}: {exc}")
    if len(values) != H:
        raise UsageError(f"--delta needs {H} thresholds, got {len(values)}")
    return "explicit", np.array(values)


def _config(args, T, K_default):
    K = args.boot if args.boot is not None else K_default
    try:
        cfg = BootstrapConfig(K=K, block_m=args.block, bandwidth_n=args.bandwidth,
                              alpha=args.alpha, master_seed=args.seed)
        cfg.block_length(T)
        cfg.bandwidth(T)
    except ValueError as exc:
        raise UsageError(str(exc))
    return cfg


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.10g}"
    return str(v)


def _emit(args, columns, rows, meta):
    if args.out == "json":
        text = json.dumps({"meta": meta, "rows": [dict(zip(columns, r)) for r in rows]},
                          indent=2, sort_keys=True) + "\n"
    else:
        lines = ["\t".join(columns)] + ["\t".join(_fmt(v) for v in r) for r in rows]
        text = "\n".join(lines) + "\n"
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_test(args):
    try:
        table = load_curves(args.file, delimiter=args.delimiter,
                            on_bad_row="error" if args.strict else "drop")
        values = intraday_returns(table) if args.returns else table.values
    except (CurveParseError, ValueError) as exc:
        raise DataError(str(exc))
    if args.demean != "none":
        log.warning("demeaning input (%s); the test assumes centred curves", args.demean)
        values = demean(values, args.demean)
    series = FunctionalSeries(values, Grid1D(values.shape[1]))
    T, H = series.T, args.lags
    if not 1 <= H < T:
        raise UsageError(f"need 1 <= lags < T={T}")
    if args.basis_dim < 1:
        raise UsageError("basis dimension must be positive")
    cfg = _config(args, T, 1000)
    coef = project_fourier(series, args.basis_dim)
    delta = None
    if args.delta:
        kind, parsed = _parse_delta(args.delta, H)
        if kind == "weights":
            weights, table = parsed
            if len(weights) != 1:
                raise UsageError("test takes a single weight in --delta w:FILE")
            delta = weights[0] * table
        else:
            delta = parsed
        if np.any(delta <= 0):
            raise UsageError("relevance thresholds must be positive")
        if cfg.alpha >= 0.5:
            raise UsageError("the relevant test requires alpha < 1/2")
    with threadpool_limits(1):
        if delta is None:
            res = run_portmanteau_test(coef, H, cfg)
        else:
            res = run_relevant_test(coef, H, delta, cfg)
    p = res.p_classical_by_lag()
    columns = ["h", "norm", "S", "p_value"]
    rows = [[h, float(res.observed.norms[h - 1]), float(res.observed.S[h - 1]), float(p[h - 1])]
            for h in range(1, H + 1)]
    reject = bool(p[-1] < cfg.alpha)
    if delta is not None:
        pr = res.p_relevant_by_lag()
        columns += ["delta", "S_rel", "p_value_rel"]
        for h in range(1, H + 1):
            rows[h - 1] += [float(delta[h - 1]), float(res.relevant.S_rel[h - 1]), float(pr[h - 1])]
        reject = bool(pr[-1] < cfg.alpha)
    meta = {k: v for k, v in res.metadata.items() if k != "backend"}
    meta.update(alpha=cfg.alpha, dropped_rows=table.dropped, demean=args.demean, reject=reject)
    _emit(args, columns, rows, meta)
    return EXIT_REJECT if (args.ci and reject) else EXIT_OK


def cmd_simulate(args):
    spec = _spec(args)
    series = gen_model(spec)
    if args.out == "json":
        _emit(args, ["t", "values"], [[t + 1, row.tolist()] for t, row in enumerate(series.values)],
              dict(model=spec.id, T=spec.T, grid=spec.grid.m, seed=spec.seed, burn_in=spec.burn_in,
                   kernel_norm=spec.kernel_hs))
    elif args.output:
        write_curves(args.output, series.values)
    else:
        for row in series.values:
            sys.stdout.write("\t".join(repr(float(v)) for v in row) + "\n")
    return EXIT_OK


def _spec(args):
    try:
        if not args.kernel_norm > 0:
            raise ValueError("--kernel-norm must be positive")
        return ModelSpec(args.model, args.T, Grid1D(args.grid), args.burn_in, args.seed,
                         kernel_hs=args.kernel_norm)
    except ValueError as exc:
        raise UsageError(str(exc))


def cmd_mc(args):
    spec = _spec(args)
    H = args.lags
    if not 1 <= H < spec.T or args.reps < 1:
        raise UsageError("need 1 <= lags < T and reps >= 1")
    cfg = _config(args, spec.T, 200)
    weights = table = None
    if args.delta:
        kind, parsed = _parse_delta(args.delta, H, args.model)
        if kind != "weights":
            raise UsageError("mc takes --delta w1,w2,...:FILE|ref")
        weights, table = parsed
        if cfg.alpha >= 0.5:
            raise UsageError("the relevant test requires alpha < 1/2")
    report = mc_rejection_rates(args.model, spec.T, H, args.reps, cfg, weights, table,
                                D=args.basis_dim, grid_m=args.grid, burn_in=args.burn_in,
                                kernel_hs=args.kernel_norm, threads=resolve_threads(args.threads))
    columns = ["model", "T", "test", "w", "H", "rate", "se"]
    rows = [[r["model"], r["T"], r["test"], r["w"], r["H"], r["rate"], r["se"]] for r in report.records()]
    meta = dict(K=report.K, m=report.m, n=report.n, bandwidth=report.bandwidth, alpha=report.alpha,
                reps=report.reps, D=report.D, grid=report.grid_m, kernel_norm=report.kernel_hs,
                seed=args.seed)
    _emit(args, columns, rows, meta)
    return EXIT_OK


def cmd_norms(args):
    spec = _spec(args)
    if args.reps < 1 or args.lags < 1:
        raise UsageError("need reps >= 1 and lags >= 1")
    means, var = estimate_norm_table(args.model, spec.T, args.basis_dim, args.reps, args.lags,
                                     grid_m=args.grid, burn_in=args.burn_in, seed=args.seed,
                                     kernel_hs=args.kernel_norm, threads=resolve_threads(args.threads))
    rows = [[h, float(means[h - 1]), float(var[h - 1])] for h in range(1, args.lags + 1)]
    meta = dict(model=args.model, T=spec.T, D=args.basis_dim, reps=args.reps, grid=args.grid,
                kernel_norm=args.kernel_norm, seed=args.seed)
    _emit(args, ["h", "mean", "var"], rows, meta)
    return EXIT_OK


COMMANDS = {"test": cmd_test, "simulate": cmd_simulate, "mc": cmd_mc, "norms": cmd_norms}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        if args.threads is not None and args.threads < 1:
            raise UsageError("--threads must be positive")
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
