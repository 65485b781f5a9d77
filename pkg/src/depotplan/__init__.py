"""Two-phase facility planning toolkit.

Phase one places k depots with same-size k-means over a seed sample of
waypoints; phase two assigns the full waypoint set to the now-fixed depots
by solving the balanced transportation problem exactly.
"""
from .core import (
    AssignmentPlan,
    BalanceMode,
    ConfigError,
    ContractError,
    CostMatrix,
    DataError,
    DepotSet,
    Phase,
    Point2,
    WaypointSet,
    build_cost_matrix,
    euclidean_distance,
    plan_cost,
    validate_plan,
)
from .balanced_kmeans import (
    ClusteringState,
    KMeansConfig,
    balanced_initialize,
    initialize_centroids,
    kmeans_assign,
    refine_by_swaps,
    run_balanced_kmeans,
    update_centroids,
)
from .transport import (
    DuplicatedCostMatrix,
    TransportInstance,
    brute_force_oracle,
    hungarian_oracle,
    solve_transport,
    solve_transport_full,
)
from .pipeline import RunConfig, RunResult, run_two_phase, split_waypoints
from .metrics import MetricsReport, SweepEntry, mse, percent_change, sweep_k
from .dataio import (
    OutputBundle,
    generate_synthetic,
    ingest_csv,
    write_outputs,
)
from .cli import run_cli

__version__ = "0.1.0"

__all__ = [
    "AssignmentPlan", "BalanceMode", "ConfigError", "ContractError",
    "CostMatrix", "DataError", "DepotSet", "Phase", "Point2", "WaypointSet",
    "build_cost_matrix", "euclidean_distance", "plan_cost", "validate_plan",
    "ClusteringState", "KMeansConfig", "balanced_initialize",
    "initialize_centroids", "kmeans_assign", "refine_by_swaps",
    "run_balanced_kmeans", "update_centroids",
    "DuplicatedCostMatrix", "TransportInstance", "brute_force_oracle",
    "hungarian_oracle", "solve_transport", "solve_transport_full",
    "RunConfig", "RunResult", "run_two_phase", "split_waypoints",
    "MetricsReport", "SweepEntry", "mse", "percent_change", "sweep_k",
    "OutputBundle", "generate_synthetic", "ingest_csv", "write_outputs",
    "run_cli",
]
