"""Compare the compiled and numpy kernels.

Usage::

    python benchmarks/bench_kernels.py [--repeat 5] [--quick]

For ``bootstrap_lag`` the table also shows which algorithm the dispatch rule in
``fportmanteau.kernels`` selects, so ``STREAMING_COST`` can be checked against
the measured crossover.
"""

import argparse
import timeit

import numpy as np

from fportmanteau import _kernels_py as python
from fportmanteau import kernels

try:
    from fportmanteau import _ckernels as compiled
except ImportError:
    compiled = None


def best_of(fn, repeat):
    number = 1
    while timeit.timeit(fn, number=number) < 0.05 and number < 1000:
        number *= 2
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def bench_simple(repeat, sizes):
    print(f"{'kernel':<14}{'T':>6}{'D':>4}{'numpy ms':>11}{'compiled ms':>13}{'speedup':>9}")
    for T, D in sizes:
        coef = np.random.default_rng(0).standard_normal((T, D))
        P = python.lag_products(coef, 1)
        cases = {
            "lagcov_path": lambda mod: mod.lagcov_path(coef, 1),
            "local_moments": lambda mod: mod.local_moments(P, int(round(T ** (2 / 3)))),
            "block_sums": lambda mod: mod.block_sums(P, int(round(T ** (1 / 3)))),
        }
        for name, call in cases.items():
            t_py = best_of(lambda: call(python), repeat) * 1e3
            if compiled is None:
                print(f"{name:<14}{T:>6}{D:>4}{t_py:>11.3f}{'-':>13}{'-':>9}")
                continue
            t_c = best_of(lambda: call(compiled), repeat) * 1e3
            print(f"{name:<14}{T:>6}{D:>4}{t_py:>11.3f}{t_c:>13.3f}{t_py / t_c:>8.1f}x")


def bench_bootstrap(repeat, sizes):
    print()
    print(f"{'bootstrap_lag':<14}{'T':>6}{'D':>4}{'K':>6}{'gram ms':>10}{'stream ms':>11}"
          f"{'faster':>8}{'chosen':>8}")
    for T, D, K in sizes:
        rng = np.random.default_rng(1)
        coef = rng.standard_normal((T, D))
        P = python.lag_products(coef, 1)
        Y = P - python.local_moments(P, T)
        R = rng.standard_normal((K, T))
        m = int(round(T ** (1 / 3)))
        t_gram = best_of(lambda: python.bootstrap_lag(P, Y, R, m, T), repeat) * 1e3
        n_t, width = P.shape
        chosen = "stream" if kernels.STREAMING_COST * K * width < n_t * (width + K) else "gram"
        if compiled is None:
            print(f"{'':<14}{T:>6}{D:>4}{K:>6}{t_gram:>10.2f}{'-':>11}{'-':>8}{chosen:>8}")
            continue
        t_stream = best_of(lambda: compiled.bootstrap_lag(P, Y, R, m, T), repeat) * 1e3
        faster = "stream" if t_stream < t_gram else "gram"
        print(f"{'':<14}{T:>6}{D:>4}{K:>6}{t_gram:>10.2f}{t_stream:>11.2f}{faster:>8}{chosen:>8}")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--quick", action="store_true", help="smaller problem sizes")
    args = parser.parse_args()
    print(f"active backend: {kernels.BACKEND}")
    if compiled is None:
        print("compiled extension not built; only numpy timings are shown")
    if args.quick:
        simple = [(128, 9), (512, 17)]
        boot = [(128, 9, 20), (256, 17, 200)]
    else:
        simple = [(128, 17), (512, 17), (2000, 17), (2000, 51)]
        boot = [(128, 17, 10), (128, 17, 200), (256, 17, 20), (256, 17, 200),
                (512, 17, 50), (512, 17, 1000), (1024, 9, 200), (1024, 17, 20)]
    bench_simple(args.repeat, simple)
    bench_bootstrap(args.repeat, boot)


if __name__ == "__main__":
    main()
