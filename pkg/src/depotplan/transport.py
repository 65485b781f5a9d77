"""Exact solvers for the balanced waypoint-to-depot assignment problem.

The main solver treats the problem as a min-cost flow whose waypoint nodes
can be contracted away: every waypoint starts at its cheapest depot, and the
residual network then only connects depots through "cheapest relocation"
edges. Successive shortest paths with potentials on that k-node graph give
the exact optimum (the constraint matrix is totally unimodular, so there is
no integrality gap to worry about).

Two independent oracles are provided for cross-checking: exhaustive
enumeration, and the column-duplication reduction to a square one-to-one
assignment problem.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .core import AssignmentPlan, ContractError, CostMatrix

FIXED_POINT_SCALE = 10 ** 6
BRUTE_FORCE_LIMIT = 10 ** 7


@dataclass(frozen=True)
class TransportInstance:
    """A balanced transportation instance: costs plus per-depot capacities.

    `n_k` may be a single target load (strict balance) or a per-depot
    sequence; either way total capacity must equal the number of waypoints.
    """

    costs: CostMatrix
    n_k: object  # int or sequence of ints

    def __post_init__(self):
        caps = np.asarray(self.n_k, dtype=np.int64).reshape(-1)
        if caps.size == 1 and self.costs.k != 1:
            caps = np.full(self.costs.k, caps[0], dtype=np.int64)
        if caps.size != self.costs.k:
            raise ContractError(
                f"capacity vector has {caps.size} entries for {self.costs.k} depots"
            )
        if caps.min() < 0:
            raise ContractError("negative depot capacity")
        if int(caps.sum()) != self.costs.n:
            raise ContractError(
                f"total capacity {int(caps.sum())} != {self.costs.n} waypoints"
            )
        object.__setattr__(self, "n_k", self.n_k)
        object.__setattr__(self, "_caps", caps)

    @property
    def capacities(self) -> np.ndarray:
        return self._caps

    @property
    def target_load(self) -> int:
        return int(self._caps.min())


@dataclass(frozen=True)
class DuplicatedCostMatrix:
    """Cost matrix with each depot column repeated n_k times (square when
    the instance is exactly balanced), for one-to-one assignment solvers."""

    values: np.ndarray
    n_k: int

    @classmethod
    def from_cost_matrix(cls, costs: CostMatrix, n_k: int) -> "DuplicatedCostMatrix":
        if n_k < 1:
            raise ContractError(f"n_k must be >= 1, got {n_k}")
        return cls(np.repeat(costs.values, n_k, axis=1), int(n_k))

    def source_column(self, col: int) -> int:
        """Depot index a duplicated column collapses back to."""
        return col // self.n_k


def _valid_top(heap, assign, depot):
    """Smallest live entry of a relocation heap (lazy deletion)."""
    while heap:
        entry = heap[0]
        if assign[entry[1]] == depot:
            return entry
        heapq.heappop(heap)
    return None


def _ssp_min_cost_assign(values: np.ndarray, caps: np.ndarray):
    """Successive shortest paths on the depot-contracted residual graph.

    Returns (assignment array, depot potentials). Starting point: every
    waypoint at its cheapest depot, which is dual-feasible with zero
    potentials. Each augmentation moves one waypoint per path edge and
    shrinks the total overload by one.
    """
    n, k = values.shape
    assign = np.argmin(values, axis=1).tolist()  # ties: lowest depot index
    loads = [0] * k
    for j in assign:
        loads[j] += 1
    pot = [0.0] * k
    excess = [loads[j] - int(caps[j]) for j in range(k)]
    total_surplus = sum(e for e in excess if e > 0)
    if total_surplus == 0:
        return np.asarray(assign, dtype=np.int64), pot

    rows = values.tolist()
    # heaps[a][b]: (cost[i,b] - cost[i,a], i) over waypoints i currently at a.
    # Entries are functions of (i, a, b) alone, so a stale entry is detected
    # purely by assign[i] != a; costs never go stale.
    heaps = [[[] for _ in range(k)] for _ in range(k)]
    arr_assign = np.asarray(assign)
    for a in range(k):
        idx = np.flatnonzero(arr_assign == a)
        if idx.size == 0:
            continue
        base = values[idx, a]
        for b in range(k):
            if b == a:
                continue
            h = list(zip((values[idx, b] - base).tolist(), idx.tolist()))
            heapq.heapify(h)
            heaps[a][b] = h

    inf = math.inf
    for _ in range(total_surplus):
        dist = [inf] * k
        prev = [-1] * k
        pq = []
        for a in range(k):
            if excess[a] > 0:
                dist[a] = 0.0
                heapq.heappush(pq, (0.0, a))
        visited = [False] * k
        target = -1
        while pq:
            d_u, u = heapq.heappop(pq)
            if visited[u]:
                continue
            visited[u] = True
            if excess[u] < 0:
                target = u
                break
            pot_u = pot[u]
            hu = heaps[u]
            for v in range(k):
                if v == u:
                    continue
                top = _valid_top(hu[v], assign, u)
                if top is None:
                    continue
                w = top[0] + pot_u - pot[v]
                if w < 0.0:
                    w = 0.0  # float round-off guard; never triggers in fixed-point mode
                nd = d_u + w
                if nd < dist[v]:
                    dist[v] = nd
                    prev[v] = u
                    heapq.heappush(pq, (nd, v))
        if target < 0:
            raise ContractError("no augmenting path; capacities are inconsistent")
        d_t = dist[target]
        for v in range(k):
            pot[v] += d_t if dist[v] > d_t else dist[v]
        # walk back and apply one relocation per path edge
        path = []
        v = target
        while prev[v] >= 0:
            path.append((prev[v], v))
            v = prev[v]
        for a, b in reversed(path):
            entry = _valid_top(heaps[a][b], assign, a)
            i = entry[1]
            heapq.heappop(heaps[a][b])
            assign[i] = b
            row = rows[i]
            base = row[b]
            hb = heaps[b]
            for c in range(k):
                if c != b:
                    heapq.heappush(hb[c], (row[c] - base, i))
        excess[path[-1][0]] -= 1
        excess[target] += 1
    return np.asarray(assign, dtype=np.int64), pot


def solve_transport(instance: TransportInstance, fixed_point: bool = False):
    """Optimal balanced assignment and its objective value.

    With `fixed_point=True` costs are scaled by 10^6 and rounded to integers
    before solving, making every comparison exact (bit-stable regression
    mode); the reported objective is then the rounded-cost optimum unscaled.
    """
    plan, objective, _, _ = solve_transport_full(instance, fixed_point=fixed_point)
    return plan, objective


def solve_transport_full(instance: TransportInstance, fixed_point: bool = False):
    """Like solve_transport, but also returns the optimal dual pair (u, v).

    The duals satisfy u_i + v_j <= cost[i, j] everywhere, with equality on
    every assigned pair — a certificate of optimality.
    """
    values = instance.costs.values
    caps = instance.capacities
    if fixed_point:
        work = np.round(values * FIXED_POINT_SCALE).astype(np.int64)
    else:
        work = values
    assign, pot = _ssp_min_cost_assign(work, caps)
    total = work[np.arange(work.shape[0]), assign].sum()
    pot = np.asarray(pot, dtype=np.float64)
    # residual feasibility c_iq - c_ia + pot_a - pot_q >= 0 rearranges to the
    # transportation dual u_i + v_q <= c_iq with u_i = c_ia - pot_a, v_q = pot_q
    u = work[np.arange(work.shape[0]), assign].astype(np.float64) - pot[assign]
    v = pot.copy()
    if fixed_point:
        total = float(total) / FIXED_POINT_SCALE
        u = u / FIXED_POINT_SCALE
        v = v / FIXED_POINT_SCALE
    plan = AssignmentPlan(assign, instance.costs.k, instance.target_load)
    return plan, float(total), u, v


def hungarian_oracle(costs: CostMatrix, n_k: int):
    """Exact reference solution via column duplication and one-to-one assignment.

    Requires an exactly balanced square reduction (n == k * n_k): each depot
    column is repeated n_k times and the resulting n-by-n matrix is solved as
    a standard linear assignment problem, then columns collapse back to
    depots.
    """
    n, k = costs.n, costs.k
    if n != k * n_k:
        raise ContractError(
            f"duplicated-matrix oracle needs n == k * n_k, got n={n}, k={k}, n_k={n_k}"
        )
    dup = DuplicatedCostMatrix.from_cost_matrix(costs, n_k)
    row_ind, col_ind = linear_sum_assignment(dup.values)
    objective = float(dup.values[row_ind, col_ind].sum())
    assign = np.empty(n, dtype=np.int64)
    assign[row_ind] = col_ind // n_k
    return AssignmentPlan(assign, k, n_k), objective


def _multinomial(n: int, caps) -> int:
    total = math.factorial(n)
    for c in caps:
        total //= math.factorial(int(c))
    return total


def brute_force_oracle(instance: TransportInstance):
    """Global optimum by exhaustive enumeration of all balanced plans.

    Returns the lexicographically smallest optimal assignment. Refuses
    instances with more than 10^7 balanced plans.
    """
    values = instance.costs.values
    caps = instance.capacities
    n, k = values.shape
    count = _multinomial(n, caps)
    if count > BRUTE_FORCE_LIMIT:
        raise ContractError(
            f"instance has {count} balanced plans, beyond the enumeration limit {BRUTE_FORCE_LIMIT}"
        )
    rows = values.tolist()
    remaining = [int(c) for c in caps]
    current = [0] * n
    best_cost = math.inf
    best_plan = None

    def recurse(i: int, cost_so_far: float):
        nonlocal best_cost, best_plan
        if cost_so_far >= best_cost:
            return  # anything here is costlier, or ties a lex-smaller plan
        if i == n:
            best_cost = cost_so_far
            best_plan = current.copy()
            return
        row = rows[i]
        for j in range(k):
            if remaining[j] > 0:
                remaining[j] -= 1
                current[i] = j
                recurse(i + 1, cost_so_far + row[j])
                remaining[j] += 1

    recurse(0, 0.0)
    plan = AssignmentPlan(np.asarray(best_plan, dtype=np.int64),
                          k, instance.target_load)
    return plan, float(best_cost)
