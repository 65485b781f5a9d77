"""Depot positioning via same-size k-means.

Standard k-means gives Voronoi cells of arbitrary cardinality; here every
cluster must hold the same number of waypoints. The approach: seed and warm
up with plain k-means, build a balanced assignment greedily in regret order,
then repeatedly improve it with pairwise swaps (and, when loads may differ
by one, single transfers) that strictly decrease the total cost, alternating
with centroid re-estimation until a fixed point.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np

from .core import (
    AssignmentPlan,
    BalanceMode,
    ConfigError,
    CostMatrix,
    DepotSet,
    WaypointSet,
    build_cost_matrix,
    depot_capacities,
    plan_cost,
)

logger = logging.getLogger(__name__)

# a move must beat the current plan by this much, so float noise cannot cycle
MOVE_TOLERANCE = 1e-12


@dataclass(frozen=True)
class KMeansConfig:
    k: int
    max_iters: int = 100
    seed: int = 0
    convergence_epsilon: float = 1e-9
    balance_mode: BalanceMode = BalanceMode.STRICT
    cost_exponent: int = 2

    def __post_init__(self):
        if self.k < 1:
            raise ConfigError(f"k must be >= 1, got {self.k}")
        if self.max_iters < 0:
            raise ConfigError(f"max_iters must be >= 0, got {self.max_iters}")
        if self.cost_exponent not in (1, 2):
            raise ConfigError(f"cost exponent must be 1 or 2, got {self.cost_exponent}")


@dataclass
class ClusteringState:
    """Working state of one balanced-clustering run."""

    centroids: DepotSet
    plan: AssignmentPlan
    priority_order: np.ndarray            # waypoint indices, most eager to move first
    transfer_lists: tuple                 # per-depot member indices in priority order
    objective: float


def _move_gains(values: np.ndarray, assign: np.ndarray) -> np.ndarray:
    """How much each waypoint would save at its best alternative depot."""
    n, k = values.shape
    own = values[np.arange(n), assign]
    if k == 1:
        return np.zeros(n)
    masked = values.copy()
    masked[np.arange(n), assign] = np.inf
    return own - masked.min(axis=1)


def _priority_order(values: np.ndarray, assign: np.ndarray) -> np.ndarray:
    gains = _move_gains(values, assign)
    return np.lexsort((np.arange(len(gains)), -gains))


def _make_state(centroids: DepotSet, assign: np.ndarray, costs: CostMatrix) -> ClusteringState:
    n, k = costs.n, costs.k
    plan = AssignmentPlan(assign, k, n // k)
    order = _priority_order(costs.values, plan.assigned_depot)
    by_depot = [[] for _ in range(k)]
    for i in order:
        by_depot[plan.assigned_depot[i]].append(int(i))
    lists = tuple(tuple(m) for m in by_depot)
    return ClusteringState(centroids, plan, order, lists, plan_cost(plan, costs))


def kmeans_assign(waypoints: WaypointSet, centroids: DepotSet) -> AssignmentPlan:
    """Nearest-centroid assignment (unbalanced); ties go to the lowest index."""
    costs = build_cost_matrix(waypoints, centroids, exponent=2)
    assign = np.argmin(costs.values, axis=1)
    return AssignmentPlan(assign, len(centroids), max(1, len(waypoints) // len(centroids)))


def update_centroids(waypoints: WaypointSet, plan: AssignmentPlan, k: int) -> DepotSet:
    """Component-wise mean of each cluster.

    An empty cluster is reseeded to the waypoint that sits farthest from the
    mean of its own cluster (lowest index on ties, each waypoint used at most
    once), which deterministically splits the worst-served region.
    """
    coords = waypoints.coords
    assign = plan.assigned_depot
    out = np.empty((k, 2), dtype=np.float64)
    counts = np.bincount(assign, minlength=k)
    sums_x = np.bincount(assign, weights=coords[:, 0], minlength=k)
    sums_y = np.bincount(assign, weights=coords[:, 1], minlength=k)
    nonempty = counts > 0
    out[nonempty, 0] = sums_x[nonempty] / counts[nonempty]
    out[nonempty, 1] = sums_y[nonempty] / counts[nonempty]
    empties = np.flatnonzero(~nonempty)
    if empties.size:
        own = out[assign]
        dist = np.hypot(coords[:, 0] - own[:, 0], coords[:, 1] - own[:, 1])
        for j in empties:
            pick = int(np.argmax(dist))
            out[j] = coords[pick]
            dist[pick] = -np.inf
            logger.warning("cluster %d was empty; reseeded to waypoint %d", j, pick)
    return DepotSet(out)


def initialize_centroids(waypoints: WaypointSet, config: KMeansConfig) -> DepotSet:
    """Seed k centroids by distance-squared weighted sampling from the data."""
    n, k = len(waypoints), config.k
    if n < k:
        raise ConfigError(f"cannot place {k} depots over {n} waypoints")
    rng = np.random.default_rng(config.seed)
    coords = waypoints.coords
    chosen = [int(rng.integers(n))]
    d2 = ((coords - coords[chosen[0]]) ** 2).sum(axis=1)
    while len(chosen) < k:
        weights = d2.copy()
        weights[chosen] = 0.0
        total = weights.sum()
        if total > 0.0:
            pick = int(rng.choice(n, p=weights / total))
        else:
            # all remaining points coincide with a chosen centroid
            candidates = np.setdiff1d(np.arange(n), np.asarray(chosen))
            pick = int(rng.choice(candidates))
        chosen.append(pick)
        d2 = np.minimum(d2, ((coords - coords[pick]) ** 2).sum(axis=1))
    return DepotSet(coords[np.asarray(chosen)])


def balanced_initialize(waypoints: WaypointSet, centroids: DepotSet,
                        config: KMeansConfig) -> ClusteringState:
    """Greedy capacity-respecting assignment in regret order.

    Waypoints with the most to lose (largest gap between their best and best
    alternate depot) pick first; each takes its cheapest depot that still has
    room, so the result is balanced by construction.
    """
    n, k = len(waypoints), len(centroids)
    costs = build_cost_matrix(waypoints, centroids, config.cost_exponent)
    remaining = depot_capacities(n, k, config.balance_mode).copy()
    values = costs.values
    if k == 1:
        regret = np.zeros(n)
    else:
        two = np.partition(values, 1, axis=1)[:, :2]
        regret = two[:, 1] - two[:, 0]
    order = np.lexsort((np.arange(n), -regret))
    assign = np.empty(n, dtype=np.int64)
    for i in order:
        row = values[i].copy()
        row[remaining <= 0] = np.inf
        j = int(np.argmin(row))
        assign[i] = j
        remaining[j] -= 1
    return _make_state(centroids, assign, costs)


def refine_by_swaps(state: ClusteringState, costs: CostMatrix,
                    config: KMeansConfig) -> ClusteringState:
    """Improve a balanced plan by strict-improvement moves until stable.

    Each pass visits waypoints in priority order. For a waypoint at depot d
    and every other depot d2 (cheapest first), the best swap partner inside
    d2 is considered; a swap executes whenever it lowers the total cost by
    more than MOVE_TOLERANCE. When loads may differ by one, a plain transfer
    that keeps loads legal is taken on the same condition. Stops after a full
    pass without moves, or after max_iters passes.
    """
    values = costs.values
    n, k = values.shape
    assign = state.plan.assigned_depot.copy()
    counts = state.plan.counts.copy()
    members = [np.flatnonzero(assign == j) for j in range(k)]
    within_one = config.balance_mode == BalanceMode.WITHIN_ONE
    floor_load, ceil_load = n // k, -(-n // k)

    for _ in range(config.max_iters):
        moves = 0
        for i in _priority_order(values, assign):
            d = int(assign[i])
            cost_row = values[i]
            alt_order = np.argsort(cost_row, kind="stable")
            for d2 in alt_order:
                d2 = int(d2)
                if d2 == d:
                    continue
                move_delta = cost_row[d2] - cost_row[d]
                group = members[d2]
                if group.size:
                    partner_deltas = values[group, d] - values[group, d2]
                    b = int(np.argmin(partner_deltas))
                    if move_delta + partner_deltas[b] < -MOVE_TOLERANCE:
                        p = int(group[b])
                        assign[i], assign[p] = d2, d
                        members[d2] = np.sort(np.append(np.delete(group, b), i))
                        md = members[d]
                        members[d] = np.sort(np.append(md[md != i], p))
                        moves += 1
                        break
                if (within_one and move_delta < -MOVE_TOLERANCE
                        and counts[d] - 1 >= floor_load and counts[d2] + 1 <= ceil_load):
                    assign[i] = d2
                    members[d2] = np.sort(np.append(group, i))
                    md = members[d]
                    members[d] = md[md != i]
                    counts[d] -= 1
                    counts[d2] += 1
                    moves += 1
                    break
        if moves == 0:
            break
    return _make_state(state.centroids, assign, costs)


def run_balanced_kmeans(waypoints: WaypointSet, config: KMeansConfig):
    """Full phase-one procedure.

    Returns (final centroids, balanced plan, objective trace). The trace is
    non-increasing; the loop ends at a fixed point where the centroids are
    exactly the cluster means and no pairwise swap improves the plan, or when
    the relative objective improvement falls below convergence_epsilon, or
    after max_iters rounds.
    """
    n, k = len(waypoints), config.k
    if n < k:
        raise ConfigError(f"cannot place {k} depots over {n} waypoints")
    depot_capacities(n, k, config.balance_mode)  # strict-mode divisibility gate

    centroids = initialize_centroids(waypoints, config)
    for _ in range(config.max_iters):
        plan = kmeans_assign(waypoints, centroids)
        moved = update_centroids(waypoints, plan, k)
        if np.array_equal(moved.coords, centroids.coords):
            break
        centroids = moved

    state = balanced_initialize(waypoints, centroids, config)
    costs = build_cost_matrix(waypoints, centroids, config.cost_exponent)
    state = refine_by_swaps(state, costs, config)
    trace = [state.objective]

    for _ in range(config.max_iters):
        centroids = update_centroids(waypoints, state.plan, k)
        costs = build_cost_matrix(waypoints, centroids, config.cost_exponent)
        seeded = replace(state, centroids=centroids,
                         objective=plan_cost(state.plan, costs))
        candidate = refine_by_swaps(seeded, costs, config)
        if candidate.objective > trace[-1]:
            # mean update can regress the exponent-1 objective: keep the old state
            break
        previous = state.plan.assigned_depot
        state = candidate
        trace.append(state.objective)
        if np.array_equal(previous, state.plan.assigned_depot):
            break  # fixed point: centroids are the exact means of the final plan
        if trace[-2] > 0 and (trace[-2] - trace[-1]) / trace[-2] < config.convergence_epsilon:
            # objective stalled before a full fixed point: settle the means
            settled = update_centroids(waypoints, state.plan, k)
            settled_costs = build_cost_matrix(waypoints, settled, config.cost_exponent)
            obj = plan_cost(state.plan, settled_costs)
            state = replace(state, centroids=settled, objective=obj)
            if obj <= trace[-1]:
                trace.append(obj)
            break

    return state.centroids, state.plan, tuple(trace)
