"""Q-learning route computation for packet-optical networks driven by link telemetry."""

from rlroute.engine import EngineState, PolicyDiff, TelemetryEvent, replay, revert_check, step
from rlroute.oracle import WeightedView, shortest_path, verify_policy
from rlroute.qlearning import Hyperparams, QTable, extract_route, solve_all, train
from rlroute.routes import Route, RouteTable
from rlroute.telemetry import (
    LinkTelemetry,
    RewardModel,
    TelemetrySnapshot,
    build_reward_matrix,
    link_penalty,
    load_events,
    load_telemetry,
)
from rlroute.topology import Link, Topology, load_topology, neighbors

__version__ = "0.1.0"

__all__ = [
    "EngineState", "PolicyDiff", "TelemetryEvent", "replay", "revert_check", "step",
    "WeightedView", "shortest_path", "verify_policy",
    "Hyperparams", "QTable", "extract_route", "solve_all", "train",
    "Route", "RouteTable",
    "LinkTelemetry", "RewardModel", "TelemetrySnapshot", "build_reward_matrix",
    "link_penalty", "load_events", "load_telemetry",
    "Link", "Topology", "load_topology", "neighbors",
]
