"""Compare the compiled kernels against the numpy fallback.

Usage: python benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from bellsep import _kernels_py

try:
    from bellsep import _kernels
except ImportError:
    _kernels = None


def cases():
    rng = np.random.default_rng(0)
    for n in (4, 6, 8):
        table = rng.integers(-1000, 1000, size=1 << (2 * n)).astype(np.int64)
        yield f"walsh_max n={n} ({table.size} strategies)", lambda m, t=table: m.walsh_max(t)
    probs = rng.random(8)
    cdf = np.cumsum(probs / probs.sum())
    thresholds = rng.random((8, 5))
    for trials in (10**5, 10**6):
        yield f"mc_count_positive {trials} trials, 5 parties", \
            lambda m, t=trials: m.mc_count_positive(cdf, thresholds, t, 1)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    backends = [("python", _kernels_py)] + ([("cython", _kernels)] if _kernels else [])
    print(f"{'case':<46}" + "".join(f"{name:>12}" for name, _ in backends) + ("     speedup" if _kernels else ""))
    for label, fn in cases():
        times = [min(timeit.repeat(lambda: fn(mod), number=1, repeat=args.repeat)) for _, mod in backends]
        results = {fn(mod) for _, mod in backends}
        assert len(results) == 1, f"backends disagree on {label}"
        row = f"{label:<46}" + "".join(f"{t * 1e3:10.2f}ms" for t in times)
        if _kernels:
            row += f"{times[0] / times[1]:11.1f}x"
        print(row)


if __name__ == "__main__":
    main()
