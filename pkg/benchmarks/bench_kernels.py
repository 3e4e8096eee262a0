"""Time the compiled and numpy kernel backends on the same inputs.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Prints one CSV row per (kernel, size, backend) with the best wall time.
"""
import argparse
import sys
import timeit

import numpy as np

from svcongest.kernels import backends


def cases(rng):
    coeffs = np.array([0.5, 0.3, 1.0, 0.2])
    for n in (8, 12, 16, 20):
        others = rng.uniform(0.1, 5.0, size=n - 1)
        yield "shapley_target", n, lambda k, o=others: k.shapley_target(coeffs, o, 1.7)
    for n in (5, 10, 20):
        weights = rng.uniform(0.1, 5.0, size=n)
        keys = rng.random((4 * (n - 1) * 100, n))
        yield "marginal_means", n, lambda k, w=weights, x=keys: k.marginal_means(coeffs, w, 0, x)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    impls = backends()
    if "cython" not in impls:
        print("note: compiled extension not built, timing the numpy backend only", file=sys.stderr)
    rng = np.random.default_rng(0)
    print("kernel,n,backend,seconds,speedup")
    for name, n, call in cases(rng):
        times = {}
        for label, mod in impls.items():
            number = 1 if name == "shapley_target" and n >= 16 else 3
            times[label] = min(timeit.repeat(lambda: call(mod), number=number, repeat=args.repeat)) / number
        for label, t in times.items():
            speedup = times["python"] / t
            print(f"{name},{n},{label},{t:.6g},{speedup:.2f}")


if __name__ == "__main__":
    main()
