"""Time the hot kernels under each available backend.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--studies 20000]
"""

import argparse
import math
import random
import timeit

from pvaudit.kernels import available_backends


def cases(studies, tests):
    rng = random.Random(0)
    rr, lcl, ucl = [], [], []
    for _ in range(studies):
        est, se = rng.gauss(0, 0.05), rng.uniform(0.01, 0.15)
        rr.append(math.exp(est))
        lcl.append(math.exp(est - 1.96 * se))
        ucl.append(math.exp(est + 1.96 * se))
    sorted_p = sorted(rng.random() for _ in range(studies))
    return {
        "simulate (p-hacked, min of %d)" % tests:
            lambda k: k.simulate_studies(7, 0, studies, tests, studies // 2, 0.0, 0.01, 0.15),
        "simulate (null)":
            lambda k: k.simulate_studies(7, 0, studies, 1, 0, 0.0, 0.01, 0.15),
        "CI to p conversion": lambda k: k.altman_bland_batch(rr, lcl, ucl, 1.96),
        "KS statistic": lambda k: k.ks_statistic(sorted_p),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--studies", type=int, default=20_000)
    ap.add_argument("--tests", type=int, default=50, help="draws per hacked study")
    args = ap.parse_args(argv)

    backends = available_backends()
    names = list(backends)
    print(f"{'kernel':34}" + "".join(f"{n:>12}" for n in names) + ("     speedup" if len(names) > 1 else ""))
    for label, fn in cases(args.studies, args.tests).items():
        best = {}
        for name in names:
            k = backends[name]
            best[name] = min(timeit.repeat(lambda: fn(k), number=1, repeat=args.repeat))
        row = f"{label:34}" + "".join(f"{best[n] * 1e3:10.2f}ms" for n in names)
        if len(names) > 1:
            row += f"{best['python'] / best['cython']:11.1f}x"
        print(row)


if __name__ == "__main__":
    main()
