"""Quality metrics and the multi-k evaluation harness."""
from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np

from .core import AssignmentPlan, ConfigError, ContractError, DataError, DepotSet, WaypointSet

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MetricsReport:
    k: int
    mse_phase1: float
    mse_phase2: float
    pct_change: float
    objective_phase1: float
    objective_phase2: float
    n_phase1: int
    n_phase2: int


@dataclass(frozen=True)
class SweepEntry:
    """One row of a k sweep: a report on success, an error message otherwise."""

    k: int
    report: object = None
    error: str = None


def mse(plan: AssignmentPlan, waypoints: WaypointSet, depots: DepotSet) -> float:
    """Mean squared waypoint-to-assigned-depot distance.

    Always uses squared Euclidean distance, independent of whatever cost
    exponent the solver optimized.
    """
    if plan.n != len(waypoints) or plan.k != len(depots):
        raise ContractError(
            f"plan ({plan.n} waypoints, {plan.k} depots) does not cover "
            f"{len(waypoints)} waypoints over {len(depots)} depots"
        )
    target = depots.coords[plan.assigned_depot]
    d = np.hypot(waypoints.coords[:, 0] - target[:, 0],
                 waypoints.coords[:, 1] - target[:, 1])
    return float(np.mean(d * d))


def percent_change(mse1: float, mse2: float) -> float:
    """Relative gap between the two phases' errors: (mse2 - mse1) / mse2."""
    if mse2 <= 0.0:
        raise ContractError(f"percent change undefined for mse_phase2 = {mse2}")
    return (mse2 - mse1) / mse2


def sweep_k(all_waypoints: WaypointSet, k_values, base_config) -> list[SweepEntry]:
    """Run the full two-phase pipeline once per k and collect the metrics.

    A failing k is recorded as an error entry and the sweep continues.
    Entries come back sorted by k.
    """
    from .pipeline import run_two_phase  # local import to avoid a cycle

    entries = []
    for k in sorted(k_values):
        config = replace(base_config, k=int(k), kmeans=None)
        try:
            result = run_two_phase(all_waypoints, config)
            entries.append(SweepEntry(int(k), report=result.metrics))
        except (ConfigError, DataError, ContractError) as exc:
            logger.warning("sweep: k=%d failed: %s", k, exc)
            entries.append(SweepEntry(int(k), error=str(exc)))
    return entries
