"""Per-step cost of the SMRLS and RLS stream kernels, compiled vs numpy fallback.

Usage: python benchmarks/bench_kernels.py [--steps 5000] [--repeats 3]
"""
import argparse
import time

import numpy as np

from smrls import kernels
from smrls.estimators import RlsTrainer
from smrls.rbf import build_grid_network
from smrls.selective import SmrlsState, run_stream


def per_step(fn, steps, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, (time.perf_counter() - t0) / steps)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, default=5000)
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    X = rng.uniform(-1, 1, (args.steps, 2))
    Y = np.sin(3 * X[:, 0]) * np.cos(X[:, 1])
    backends = ["python"] + (["compiled"] if kernels.compiled is not None else [])

    print(f"{'kernel':<8}{'N':>6}" + "".join(f"{b + ' us/step':>22}" for b in backends) + f"{'speedup':>10}")
    for side in (3, 6, 12):
        for kernel in ("smrls", "rls"):
            row = []
            for b in backends:
                k = kernels.get_backend(b)
                if kernel == "smrls":
                    run = lambda: run_stream(SmrlsState.create(build_grid_network(side, 2, 1.0), 10), X, Y, kernels=k)
                else:
                    run = lambda: RlsTrainer(build_grid_network(side, 2, 1.0), 0.999).run(X, Y, kernels=k)
                row.append(per_step(run, args.steps, args.repeats))
            speed = f"{row[0] / row[1]:>9.1f}x" if len(row) == 2 else ""
            print(f"{kernel:<8}{side * side:>6}" + "".join(f"{t * 1e6:>22.2f}" for t in row) + speed)


if __name__ == "__main__":
    main()
