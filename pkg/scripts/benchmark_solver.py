#!/usr/bin/env python3
"""Timing comparison: contracted-graph solver vs the duplicated-matrix oracle.

The oracle materializes an n-by-n matrix, so it stops being practical around
a few thousand waypoints; the contracted solver only ever works with k depot
nodes and stays fast. Objectives are asserted equal along the way.
"""
import argparse
import sys
import time

import numpy as np

from depotplan import CostMatrix, TransportInstance, hungarian_oracle, solve_transport


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--k", type=int, default=8)
    ap.add_argument("--sizes", type=int, nargs="+",
                    default=[64, 256, 1024, 4096])
    ap.add_argument("--seed", type=int, default=42)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    print(f"{'n':>6} {'solver_ms':>10} {'oracle_ms':>10} {'objective':>14}")
    for n in args.sizes:
        n_k = n // args.k
        n = n_k * args.k
        pts = rng.normal(0, 50, (n, 2))
        depots = rng.normal(0, 50, (args.k, 2))
        d2 = ((pts[:, None, :] - depots[None, :, :]) ** 2).sum(axis=2)
        inst = TransportInstance(CostMatrix(d2, 2), n_k)

        t0 = time.perf_counter()
        _, obj = solve_transport(inst)
        t1 = time.perf_counter()
        _, ref = hungarian_oracle(inst.costs, n_k)
        t2 = time.perf_counter()

        assert abs(obj - ref) <= 1e-9 * max(1.0, abs(ref)), (obj, ref)
        print(f"{n:>6} {1e3 * (t1 - t0):>10.1f} {1e3 * (t2 - t1):>10.1f} {obj:>14.2f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
