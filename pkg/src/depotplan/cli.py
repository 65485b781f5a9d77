"""Command-line front end.

Subcommands:
  run     full two-phase pipeline over a waypoint CSV
  phase1  balanced clustering only, over the whole input
  phase2  assignment only, against an existing depots file
  sweep   run the pipeline for a range of k and tabulate the metrics
  synth   generate a synthetic worldwide dataset
  verify  cross-check the exact solver against both oracles

Exit codes: 0 success, 1 usage error, 2 data error, 3 infeasible configuration.
"""
from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from .balanced_kmeans import KMeansConfig, run_balanced_kmeans
from .core import (
    BalanceMode,
    ConfigError,
    ContractError,
    CostMatrix,
    DataError,
    build_cost_matrix,
    depot_capacities,
    plan_cost,
)
from .dataio import (
    generate_synthetic,
    ingest_csv,
    read_depots_csv,
    write_assignment_csv,
    write_depots_csv,
    write_metrics_csv,
    write_outputs,
    write_plot_csv,
    write_waypoints_csv,
)
from .metrics import sweep_k
from .pipeline import RunConfig, run_two_phase
from .transport import TransportInstance, brute_force_oracle, hungarian_oracle, solve_transport

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_CONFIG = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _balance(value: str) -> BalanceMode:
    return BalanceMode.WITHIN_ONE if value == "within-one" else BalanceMode.STRICT


def _parse_k_values(spec: str):
    """Accepts '7', '3..10' (inclusive) or '3,5,9'."""
    spec = spec.strip()
    try:
        if ".." in spec:
            lo, hi = spec.split("..")
            lo, hi = int(lo), int(hi)
            if hi < lo:
                raise ValueError
            return list(range(lo, hi + 1))
        if "," in spec:
            return [int(part) for part in spec.split(",")]
        return [int(spec)]
    except ValueError:
        raise _UsageError(f"--k: cannot parse k specification {spec!r}")


def _add_solver_flags(p, with_k=True, with_gamma=True):
    if with_k:
        p.add_argument("--k", required=True, help="number of depots"
                       + (" (a range like 3..10 for sweep)" if p.prog.endswith("sweep") else ""))
    if with_gamma:
        p.add_argument("--gamma", type=float, default=0.05,
                       help="phase-one waypoint fraction (default 0.05)")
    p.add_argument("--seed", type=int, default=42, help="RNG seed (default 42)")
    p.add_argument("--max-iters", type=int, default=100,
                   help="iteration cap for clustering (default 100)")
    p.add_argument("--cost-exponent", type=int, choices=(1, 2), default=2,
                   help="optimize plain (1) or squared (2) distances (default 2)")
    p.add_argument("--balance", choices=("strict", "within-one"), default="strict",
                   help="exact equal loads, or loads within one (default strict)")


def _build_parser() -> _Parser:
    parser = _Parser(prog="depotplan", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="full two-phase pipeline")
    p_run.add_argument("--input", required=True, help="waypoint CSV (id,lon,lat)")
    _add_solver_flags(p_run)
    p_run.add_argument("--out-dir", required=True, help="output directory")

    p_p1 = sub.add_parser("phase1", help="balanced clustering over the whole input")
    p_p1.add_argument("--input", required=True, help="waypoint CSV (id,lon,lat)")
    _add_solver_flags(p_p1, with_gamma=False)
    p_p1.add_argument("--out-dir", required=True, help="output directory")

    p_p2 = sub.add_parser("phase2", help="exact assignment against fixed depots")
    p_p2.add_argument("--input", required=True, help="waypoint CSV (id,lon,lat)")
    p_p2.add_argument("--depots", required=True, help="depots CSV (depot_id,lon,lat)")
    p_p2.add_argument("--cost-exponent", type=int, choices=(1, 2), default=2)
    p_p2.add_argument("--balance", choices=("strict", "within-one"), default="strict")
    p_p2.add_argument("--out-dir", required=True, help="output directory")

    p_sweep = sub.add_parser("sweep", help="metrics table across a range of k")
    p_sweep.add_argument("--input", required=True, help="waypoint CSV (id,lon,lat)")
    _add_solver_flags(p_sweep)
    p_sweep.add_argument("--out-dir", required=True, help="output directory")

    p_synth = sub.add_parser("synth", help="generate a synthetic dataset")
    p_synth.add_argument("--n", type=int, required=True, help="number of waypoints")
    p_synth.add_argument("--clusters", type=int, default=40, help="blob count (default 40)")
    p_synth.add_argument("--spread", type=float, default=3.0,
                         help="blob standard deviation in degrees (default 3.0)")
    p_synth.add_argument("--seed", type=int, default=42, help="RNG seed (default 42)")
    p_synth.add_argument("--out-dir", required=True, help="output directory")

    p_verify = sub.add_parser("verify", help="solver-versus-oracle cross-checks")
    p_verify.add_argument("--seed", type=int, default=42, help="RNG seed (default 42)")

    return parser


def _cmd_run(args) -> int:
    waypoints = ingest_csv(args.input)
    config = RunConfig(k=int(args.k), gamma=args.gamma, seed=args.seed,
                       cost_exponent=args.cost_exponent, balance_mode=_balance(args.balance),
                       max_iters=args.max_iters)
    result = run_two_phase(waypoints, config)
    bundle = write_outputs(result, args.out_dir)
    m = result.metrics
    print(f"k={m.k} n1={m.n_phase1} n2={m.n_phase2} "
          f"mse1={m.mse_phase1:.6f} mse2={m.mse_phase2:.6f} pct_change={m.pct_change:.6f}")
    print(f"phase1 {result.timing_ms['phase1']:.0f} ms, "
          f"phase2 {result.timing_ms['phase2']:.0f} ms", file=sys.stderr)
    print(f"wrote {bundle.depots_path}, {bundle.assignment_path}, "
          f"{bundle.summary_path}, {bundle.plot_path}")
    return EXIT_OK


def _cmd_phase1(args) -> int:
    waypoints = ingest_csv(args.input)
    config = KMeansConfig(k=int(args.k), max_iters=args.max_iters, seed=args.seed,
                          balance_mode=_balance(args.balance),
                          cost_exponent=args.cost_exponent)
    depots, plan, trace = run_balanced_kmeans(waypoints, config)
    os.makedirs(args.out_dir, exist_ok=True)
    write_depots_csv(depots, os.path.join(args.out_dir, "depots.csv"))
    write_assignment_csv(os.path.join(args.out_dir, "assignment.csv"),
                         waypoints, depots, plan, args.cost_exponent)
    write_plot_csv(os.path.join(args.out_dir, "plot.csv"), waypoints, plan)
    print(f"k={config.k} n={len(waypoints)} objective={trace[-1]:.6f} iterations={len(trace)}")
    return EXIT_OK


def _cmd_phase2(args) -> int:
    waypoints = ingest_csv(args.input)
    depots = read_depots_csv(args.depots)
    if len(waypoints) == 0:
        raise DataError(f"{args.input}: no waypoints to assign")
    costs = build_cost_matrix(waypoints, depots, args.cost_exponent)
    caps = depot_capacities(len(waypoints), len(depots), _balance(args.balance))
    plan, objective = solve_transport(TransportInstance(costs, caps))
    os.makedirs(args.out_dir, exist_ok=True)
    write_depots_csv(depots, os.path.join(args.out_dir, "depots.csv"))
    write_assignment_csv(os.path.join(args.out_dir, "assignment.csv"),
                         waypoints, depots, plan, args.cost_exponent)
    write_plot_csv(os.path.join(args.out_dir, "plot.csv"), waypoints, plan)
    print(f"k={len(depots)} n={len(waypoints)} objective={objective:.6f}")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    waypoints = ingest_csv(args.input)
    k_values = _parse_k_values(args.k)
    base = RunConfig(k=max(1, k_values[0]), gamma=args.gamma, seed=args.seed,
                     cost_exponent=args.cost_exponent, balance_mode=_balance(args.balance),
                     max_iters=args.max_iters)
    entries = sweep_k(waypoints, k_values, base)
    os.makedirs(args.out_dir, exist_ok=True)
    write_metrics_csv(entries, os.path.join(args.out_dir, "metrics.csv"))
    print(f"{'k':>3} {'mse_phase1':>14} {'mse_phase2':>14} {'pct_change':>11}")
    failed = 0
    for entry in entries:
        if entry.report is None:
            failed += 1
            print(f"{entry.k:>3} failed: {entry.error}", file=sys.stderr)
        else:
            r = entry.report
            print(f"{entry.k:>3} {r.mse_phase1:>14.6f} {r.mse_phase2:>14.6f} "
                  f"{r.pct_change:>11.6f}")
    if failed == len(entries):
        raise ConfigError("every k in the sweep failed")
    return EXIT_OK


def _cmd_synth(args) -> int:
    waypoints = generate_synthetic(args.n, args.clusters, args.spread, args.seed)
    os.makedirs(args.out_dir, exist_ok=True)
    path = os.path.join(args.out_dir, "points.csv")
    write_waypoints_csv(waypoints, path)
    print(f"wrote {path} ({len(waypoints)} waypoints, {args.clusters} blobs)")
    return EXIT_OK


def _check(label: str, ok: bool) -> bool:
    print(f"{'ok  ' if ok else 'FAIL'} {label}")
    return ok


def _cmd_verify(args) -> int:
    rng = np.random.default_rng(args.seed)
    all_ok = True

    w = np.array([[0.0, 1], [0, 2], [0, 3], [10, 1]])
    d = np.array([[0.0, 0], [10, 0]])
    dist = np.hypot(w[:, None, 0] - d[None, :, 0], w[:, None, 1] - d[None, :, 1])
    _, obj = solve_transport(TransportInstance(CostMatrix(dist, 1), 2))
    all_ok &= _check("displacement fixture objective = 4 + sqrt(109)",
                     abs(obj - (4.0 + math.sqrt(109))) < 1e-9)

    for trial in range(40):
        k = int(rng.integers(2, 4))
        n_k = int(rng.integers(1, 11 // k + 1))
        n = k * n_k
        vals = rng.random((n, k)) * 100
        inst = TransportInstance(CostMatrix(vals, 1), n_k)
        _, got = solve_transport(inst)
        _, want = brute_force_oracle(inst)
        if abs(got - want) > 1e-9 * max(1.0, abs(want)):
            all_ok &= _check(f"solver == brute force (n={n}, k={k})", False)
            break
    else:
        all_ok &= _check("solver == brute force on 40 random small instances", True)

    for trial in range(15):
        k = int(rng.integers(2, 7))
        n_k = int(rng.integers(1, 60 // k + 1))
        n = k * n_k
        vals = rng.random((n, k)) * 100
        inst = TransportInstance(CostMatrix(vals, 2), n_k)
        _, got = solve_transport(inst)
        _, want = hungarian_oracle(inst.costs, n_k)
        if abs(got - want) > 1e-9 * max(1.0, abs(want)):
            all_ok &= _check(f"solver == duplicated-matrix oracle (n={n}, k={k})", False)
            break
    else:
        all_ok &= _check("solver == duplicated-matrix oracle on 15 random instances", True)

    return EXIT_OK if all_ok else EXIT_DATA


_COMMANDS = {
    "run": _cmd_run,
    "phase1": _cmd_phase1,
    "phase2": _cmd_phase2,
    "sweep": _cmd_sweep,
    "synth": _cmd_synth,
    "verify": _cmd_verify,
}


def run_cli(argv) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # argparse --help
        return int(exc.code or 0)
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ContractError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def main() -> None:
    sys.exit(run_cli(sys.argv[1:]))


if __name__ == "__main__":
    main()
