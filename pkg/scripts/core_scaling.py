"""Core-update time versus input size at a fixed core and fixed sketch size.

Factor-score setup (building the ImplicitKronecker) is left out of the
sketched timing; the exact columns time both exact solvers.
"""

import argparse
import time

import numpy as np

from ridge_tucker.als import fast_core_solve, random_model, update_core_exact
from ridge_tucker.cli import parse_ints
from ridge_tucker.kronecker import ImplicitKronecker
from ridge_tucker.sketch import SketchConfig


def median_time(fn, repeats):
    out = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        out.append(time.perf_counter() - t0)
    return float(np.median(out))


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--sizes", type=parse_ints, default=(16, 32, 64, 96))
    p.add_argument("--ranks", type=parse_ints, default=(2, 2, 2))
    p.add_argument("--samples", type=int, default=50_000)
    p.add_argument("--repeats", type=int, default=7)
    args = p.parse_args()

    cfg = SketchConfig(0.1, 0.1, 0.001, sample_count_override=args.samples)
    rng = np.random.default_rng(0)
    print("size,sketched_s,exact_gram_s,exact_materialized_s")
    for size in args.sizes:
        shape = (size,) * len(args.ranks)
        x = rng.random(shape)
        model = random_model(shape, args.ranks, 0.001, rng)
        kron = ImplicitKronecker(model.factors)
        sk = median_time(lambda: fast_core_solve(kron, x, cfg), args.repeats)
        gram = median_time(lambda: update_core_exact(model, x), args.repeats)
        mat = median_time(lambda: update_core_exact(model, x, "materialized"), args.repeats)
        print(f"{size},{sk:.6f},{gram:.6f},{mat:.6f}")


if __name__ == "__main__":
    main()
