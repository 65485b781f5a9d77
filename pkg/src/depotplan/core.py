"""Shared domain types and cost primitives for the two-phase planner.

Everything downstream (clustering, transport, pipeline, metrics) works in
terms of these types. All types are immutable after construction; the
operations are pure functions, so they are safe to call concurrently.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np


class ConfigError(Exception):
    """Invalid or infeasible run configuration (bad k, gamma, divisibility...)."""


class DataError(Exception):
    """Malformed or unacceptable input data (CSV parse errors, NaNs, dup ids)."""


class ContractError(Exception):
    """An internal precondition was violated (dimension/capacity mismatch)."""


class Phase(enum.IntEnum):
    """Which batch a waypoint arrived in."""

    ONE = 1
    TWO = 2


class BalanceMode(str, enum.Enum):
    STRICT = "strict"          # every depot load exactly n/k (requires k | n)
    WITHIN_ONE = "within_one"  # loads are floor(n/k) or ceil(n/k)


def _frozen(arr: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(arr)
    if out is arr:
        out = arr.copy()
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class Point2:
    """A planar coordinate pair (e.g. longitude/latitude used as-is)."""

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise DataError(f"non-finite coordinate ({self.x}, {self.y})")


@dataclass(frozen=True)
class WaypointSet:
    """An ordered set of demand locations with stable external ids."""

    coords: np.ndarray            # (n, 2) float64
    ids: tuple[str, ...]
    phases: np.ndarray            # (n,) int8 of Phase values

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=np.float64).reshape(-1, 2)
        phases = np.asarray(self.phases, dtype=np.int8).reshape(-1)
        if len(self.ids) != coords.shape[0] or phases.shape[0] != coords.shape[0]:
            raise ContractError(
                f"ids/phases/coords length mismatch: {len(self.ids)}, "
                f"{phases.shape[0]}, {coords.shape[0]}"
            )
        if len(set(self.ids)) != len(self.ids):
            seen = set()
            dup = next(i for i in self.ids if i in seen or seen.add(i))
            raise DataError(f"duplicate waypoint id {dup!r}")
        if coords.size and not np.isfinite(coords).all():
            bad = int(np.flatnonzero(~np.isfinite(coords).all(axis=1))[0])
            raise DataError(f"non-finite coordinate for waypoint {self.ids[bad]!r}")
        object.__setattr__(self, "coords", _frozen(coords))
        object.__setattr__(self, "ids", tuple(self.ids))
        object.__setattr__(self, "phases", _frozen(phases))

    @classmethod
    def from_points(cls, points, ids=None, phase=Phase.ONE) -> "WaypointSet":
        coords = np.array([(p.x, p.y) if isinstance(p, Point2) else tuple(p) for p in points],
                          dtype=np.float64).reshape(-1, 2)
        n = coords.shape[0]
        if ids is None:
            ids = tuple(f"w{i}" for i in range(n))
        return cls(coords, tuple(ids), np.full(n, int(phase), dtype=np.int8))

    def __len__(self) -> int:
        return self.coords.shape[0]

    def point(self, i: int) -> Point2:
        return Point2(float(self.coords[i, 0]), float(self.coords[i, 1]))

    def subset(self, indices, phase=None) -> "WaypointSet":
        """New set containing the given rows, optionally re-tagged with a phase."""
        indices = np.asarray(indices, dtype=np.int64)
        phases = self.phases[indices]
        if phase is not None:
            phases = np.full(indices.shape[0], int(phase), dtype=np.int8)
        return WaypointSet(self.coords[indices], tuple(self.ids[i] for i in indices), phases)

    def scaled(self, s: float) -> "WaypointSet":
        """Uniformly scaled copy (testing aid for scale-invariance checks)."""
        return WaypointSet(self.coords * float(s), self.ids, self.phases)


@dataclass(frozen=True)
class DepotSet:
    """Positions of the k supply facilities (free in phase one, fixed after)."""

    coords: np.ndarray            # (k, 2) float64

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=np.float64).reshape(-1, 2)
        if coords.shape[0] < 1:
            raise ConfigError("a depot set needs at least one depot")
        if not np.isfinite(coords).all():
            raise DataError("non-finite depot coordinate")
        object.__setattr__(self, "coords", _frozen(coords))

    @classmethod
    def from_points(cls, points) -> "DepotSet":
        return cls(np.array([(p.x, p.y) if isinstance(p, Point2) else tuple(p) for p in points],
                            dtype=np.float64))

    def __len__(self) -> int:
        return self.coords.shape[0]

    def point(self, j: int) -> Point2:
        return Point2(float(self.coords[j, 0]), float(self.coords[j, 1]))


@dataclass(frozen=True)
class CostMatrix:
    """Dense n-by-k matrix of waypoint-to-depot distances (or squared distances)."""

    values: np.ndarray            # (n, k) float64, non-negative
    exponent: int = 2             # 1: plain distances, 2: squared distances

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise ContractError(f"cost matrix must be 2-d, got shape {values.shape}")
        if self.exponent not in (1, 2):
            raise ConfigError(f"cost exponent must be 1 or 2, got {self.exponent}")
        if values.size and (not np.isfinite(values).all() or values.min() < 0.0):
            raise DataError("cost matrix entries must be finite and non-negative")
        object.__setattr__(self, "values", _frozen(values))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def k(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class AssignmentPlan:
    """A total mapping waypoint index -> depot index, plus per-depot loads.

    `n_k` is the target load per depot (floor(n/k) when k does not divide n);
    `counts` is derived and always consistent with `assigned_depot`.
    """

    assigned_depot: np.ndarray    # (n,) int64
    k: int
    n_k: int = 0
    counts: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        assigned = np.asarray(self.assigned_depot, dtype=np.int64).reshape(-1)
        if self.k < 1:
            raise ConfigError(f"k must be >= 1, got {self.k}")
        if assigned.size and (assigned.min() < 0 or assigned.max() >= self.k):
            raise ContractError("assigned depot index out of range")
        n_k = self.n_k if self.n_k > 0 else (assigned.size // self.k if assigned.size else 1)
        counts = np.bincount(assigned, minlength=self.k)
        object.__setattr__(self, "assigned_depot", _frozen(assigned))
        object.__setattr__(self, "n_k", int(n_k))
        object.__setattr__(self, "counts", _frozen(counts))

    @property
    def n(self) -> int:
        return self.assigned_depot.shape[0]


@dataclass(frozen=True)
class PlanValidation:
    """Pass/fail report for the assignment-plan constraints."""

    covers_all: bool              # one depot per waypoint, right number of rows
    in_range: bool                # every depot index within [0, k)
    balanced: bool                # loads match the balance mode
    failures: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return self.covers_all and self.in_range and self.balanced


def euclidean_distance(a: Point2, b: Point2) -> float:
    """Plain Euclidean distance between two planar points."""
    return math.hypot(a.x - b.x, a.y - b.y)


def build_cost_matrix(waypoints: WaypointSet, depots: DepotSet, exponent: int = 2) -> CostMatrix:
    """Distances from every waypoint to every depot, raised to `exponent`."""
    if len(waypoints) < 1:
        raise ContractError("cannot build a cost matrix over an empty waypoint set")
    if exponent not in (1, 2):
        raise ConfigError(f"cost exponent must be 1 or 2, got {exponent}")
    w = waypoints.coords
    d = depots.coords
    dist = np.hypot(w[:, None, 0] - d[None, :, 0], w[:, None, 1] - d[None, :, 1])
    values = dist * dist if exponent == 2 else dist
    return CostMatrix(values, exponent)


def plan_cost(plan: AssignmentPlan, costs: CostMatrix) -> float:
    """Total cost of a plan: the sum of each waypoint's cost at its depot."""
    if plan.n != costs.n or plan.k != costs.k:
        raise ContractError(
            f"plan ({plan.n}x{plan.k}) does not match cost matrix ({costs.n}x{costs.k})"
        )
    if plan.n == 0:
        return 0.0
    return float(costs.values[np.arange(plan.n), plan.assigned_depot].sum())


def validate_plan(plan: AssignmentPlan, n: int, k: int, strict: bool = True) -> PlanValidation:
    """Check the unit-row-sum and load constraints of an assignment plan.

    Strict mode requires every depot load to equal ``plan.n_k`` exactly;
    relaxed mode tolerates a deviation of at most one per depot.
    """
    failures = []
    covers_all = plan.n == n
    if not covers_all:
        failures.append(f"plan covers {plan.n} waypoints, expected {n}")
    in_range = plan.k == k and (plan.n == 0 or int(plan.assigned_depot.max()) < k)
    if not in_range:
        failures.append(f"plan is over {plan.k} depots, expected {k}")
    deviation = np.abs(plan.counts - plan.n_k)
    limit = 0 if strict else 1
    balanced = bool((deviation <= limit).all())
    if not balanced:
        worst = int(np.argmax(deviation))
        failures.append(
            f"depot {worst} holds {int(plan.counts[worst])} waypoints, "
            f"target {plan.n_k}" + ("" if strict else " (+/-1)")
        )
    return PlanValidation(covers_all, in_range, balanced, tuple(failures))


def depot_capacities(n: int, k: int, mode: BalanceMode) -> np.ndarray:
    """Per-depot loads for n waypoints over k depots under the balance mode.

    Strict mode demands k | n; within_one gives the first n mod k depots the
    larger load, so the capacity vector is deterministic.
    """
    if k < 1:
        raise ConfigError(f"k must be >= 1, got {k}")
    if mode == BalanceMode.STRICT:
        if n % k != 0:
            raise ConfigError(f"{n} not divisible by {k} "
                              f"(strict balance requires k | n; use balance mode within_one)")
        return np.full(k, n // k, dtype=np.int64)
    base, extra = divmod(n, k)
    caps = np.full(k, base, dtype=np.int64)
    caps[:extra] += 1
    return caps
