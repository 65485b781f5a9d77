"""Orchestration of the two-phase procedure.

Phase one clusters a seed fraction of the waypoints and freezes the
resulting centroids as depot sites. Phase two assigns the full waypoint set
(seed points included, which may move) to those fixed depots by solving the
balanced transportation problem exactly.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .balanced_kmeans import KMeansConfig, run_balanced_kmeans
from .core import (
    AssignmentPlan,
    BalanceMode,
    ConfigError,
    ContractError,
    DepotSet,
    Phase,
    PlanValidation,
    WaypointSet,
    build_cost_matrix,
    depot_capacities,
    plan_cost,
    validate_plan,
)
from .metrics import MetricsReport, mse, percent_change
from .transport import TransportInstance, solve_transport


@dataclass(frozen=True)
class RunConfig:
    k: int
    gamma: float = 0.05
    seed: int = 42
    cost_exponent: int = 2
    balance_mode: BalanceMode = BalanceMode.STRICT
    max_iters: int = 100
    convergence_epsilon: float = 1e-9
    kmeans: KMeansConfig = None

    def __post_init__(self):
        if self.k < 1:
            raise ConfigError(f"k must be >= 1, got {self.k}")
        if not (0.0 < self.gamma < 1.0):
            raise ConfigError(f"gamma must lie in (0, 1), got {self.gamma}")
        if self.cost_exponent not in (1, 2):
            raise ConfigError(f"cost exponent must be 1 or 2, got {self.cost_exponent}")
        if self.kmeans is None:
            object.__setattr__(self, "kmeans", KMeansConfig(
                k=self.k,
                max_iters=self.max_iters,
                seed=self.seed,
                convergence_epsilon=self.convergence_epsilon,
                balance_mode=self.balance_mode,
                cost_exponent=self.cost_exponent,
            ))


@dataclass(frozen=True)
class RunResult:
    config: RunConfig
    depots: DepotSet
    plan_phase1: AssignmentPlan
    plan_phase2: AssignmentPlan
    waypoints_phase1: WaypointSet
    waypoints: WaypointSet                  # the union set, phase-tagged
    metrics: MetricsReport
    trace_phase1: tuple
    validation_phase1: PlanValidation
    validation_phase2: PlanValidation
    timing_ms: dict = field(default_factory=dict)

    @property
    def iterations_phase1(self) -> int:
        return len(self.trace_phase1)


def phase1_size(n: int, gamma: float, k: int, mode: BalanceMode) -> int:
    """Seed-sample size: round(gamma * n), snapped to a multiple of k when the
    balance is strict (minimum k either way)."""
    raw = int(round(gamma * n))
    if mode == BalanceMode.STRICT:
        n1 = max(k, int(round(raw / k)) * k)
    else:
        n1 = max(k, raw)
    if n1 >= n:
        raise ConfigError(
            f"gamma={gamma} leaves no waypoints for the assignment phase (n={n})"
        )
    return n1


def split_waypoints(all_waypoints: WaypointSet, gamma: float, seed: int,
                    k: int = 1, balance_mode: BalanceMode = BalanceMode.WITHIN_ONE):
    """Deterministic disjoint split of the waypoints into the two phases.

    A seeded uniform shuffle picks the seed fraction; each part keeps the
    original file order. The parts re-tag their members' phases, and together
    they cover the input exactly.
    """
    if not (0.0 < gamma < 1.0):
        raise ConfigError(f"gamma must lie in (0, 1), got {gamma}")
    n = len(all_waypoints)
    n1 = phase1_size(n, gamma, k, balance_mode)
    if n1 < k:
        raise ConfigError(f"phase-one sample of {n1} cannot seat {k} depots")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    first = np.sort(perm[:n1])
    second = np.sort(perm[n1:])
    return (all_waypoints.subset(first, phase=Phase.ONE),
            all_waypoints.subset(second, phase=Phase.TWO))


def _union_with_tags(all_waypoints: WaypointSet, phase1_ids) -> WaypointSet:
    marked = set(phase1_ids)
    phases = np.array([int(Phase.ONE) if i in marked else int(Phase.TWO)
                       for i in all_waypoints.ids], dtype=np.int8)
    return WaypointSet(all_waypoints.coords, all_waypoints.ids, phases)


def run_two_phase(all_waypoints: WaypointSet, config: RunConfig) -> RunResult:
    """Position depots on the seed sample, then assign every waypoint exactly.

    The depots coming out of phase one are immutable afterwards; phase two
    may reassign seed waypoints. Both plans are validated against their
    exact capacity targets before returning.
    """
    n, k = len(all_waypoints), config.k
    if n < 2:
        raise ConfigError(f"need at least 2 waypoints, got {n}")
    caps2 = depot_capacities(n, k, config.balance_mode)  # fail fast on divisibility

    w1, _w2 = split_waypoints(all_waypoints, config.gamma, config.seed,
                              k, config.balance_mode)

    t0 = time.perf_counter()
    depots, plan1, trace = run_balanced_kmeans(w1, config.kmeans)
    t1 = time.perf_counter()

    union = _union_with_tags(all_waypoints, w1.ids)
    costs2 = build_cost_matrix(union, depots, config.cost_exponent)
    plan2, objective2 = solve_transport(TransportInstance(costs2, caps2))
    t2 = time.perf_counter()

    strict = config.balance_mode == BalanceMode.STRICT
    val1 = validate_plan(plan1, len(w1), k, strict=strict)
    val2 = validate_plan(plan2, n, k, strict=strict)
    if not (val1.ok and val2.ok):
        raise ContractError(
            "balance violated: " + "; ".join(val1.failures + val2.failures)
        )
    if not np.array_equal(np.bincount(plan2.assigned_depot, minlength=k), caps2):
        raise ContractError("phase-two loads do not match the capacity vector")

    mse1 = mse(plan1, w1, depots)
    mse2 = mse(plan2, union, depots)
    pct = 0.0 if mse2 == 0.0 else percent_change(mse1, mse2)
    report = MetricsReport(
        k=k,
        mse_phase1=mse1,
        mse_phase2=mse2,
        pct_change=pct,
        objective_phase1=trace[-1],
        objective_phase2=objective2,
        n_phase1=len(w1),
        n_phase2=n - len(w1),
    )
    return RunResult(
        config=config,
        depots=depots,
        plan_phase1=plan1,
        plan_phase2=plan2,
        waypoints_phase1=w1,
        waypoints=union,
        metrics=report,
        trace_phase1=tuple(trace),
        validation_phase1=val1,
        validation_phase2=val2,
        timing_ms={"phase1": (t1 - t0) * 1e3, "phase2": (t2 - t1) * 1e3},
    )
