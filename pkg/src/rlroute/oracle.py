"""Exact minimum-penalty routing (Dijkstra) used to check learned policies."""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Mapping

from rlroute.routes import Pair, Route, RouteTable, UnreachableError, path_reward
from rlroute.telemetry import DEFAULT_MODEL, RewardModel, TelemetrySnapshot, link_penalties
from rlroute.topology import LinkKey, Topology, TopologyError, link_key


@dataclass(frozen=True)
class WeightedView:
    """Topology with a strictly positive penalty (us) on every link."""

    topology: Topology
    weights: Mapping[LinkKey, float]

    def __post_init__(self) -> None:
        weights = {link_key(*k): float(w) for k, w in self.weights.items()}
        keys = {l.key for l in self.topology.links}
        if weights.keys() != keys:
            missing = sorted(keys - weights.keys())
            raise TopologyError(f"weights do not match topology links (missing {missing[:3]})")
        for (a, b), w in weights.items():
            if not (w > 0 and math.isfinite(w)):
                raise ValueError(f"weight of link {a}-{b} must be positive and finite, got {w}")
        object.__setattr__(self, "weights", weights)

    @classmethod
    def from_telemetry(
        cls, t: Topology, snap: TelemetrySnapshot, model: RewardModel = DEFAULT_MODEL
    ) -> WeightedView:
        return cls(t, link_penalties(t, snap, model))

    def weight(self, s: int, a: int) -> float:
        return self.weights[link_key(s, a)]

    def scaled(self, c: float) -> WeightedView:
        return WeightedView(self.topology, {k: w * c for k, w in self.weights.items()})

    def path_reward(self, path: tuple[int, ...]) -> float:
        return path_reward(path, lambda p: self.weight(*p))


def shortest_paths_from(view: WeightedView, src: int) -> dict[int, tuple[int, ...]]:
    """Minimum-penalty path from ``src`` to every reachable node.

    Heap entries are ``(cost, path)`` so equal-cost candidates pop in
    lexicographic node-sequence order; the first settlement of a node is final.
    """
    t = view.topology
    if src not in t:
        raise TopologyError(f"unknown node {src}")
    settled: dict[int, tuple[int, ...]] = {}
    heap: list[tuple[float, tuple[int, ...]]] = [(0.0, (src,))]
    while heap:
        cost, path = heapq.heappop(heap)
        u = path[-1]
        if u in settled:
            continue
        settled[u] = path
        for v, link in t.adjacency[u]:
            if v not in settled:
                heapq.heappush(heap, (cost + view.weights[link.key], path + (v,)))
    return settled


def shortest_path(view: WeightedView, src: int, dst: int) -> Route:
    if dst not in view.topology:
        raise TopologyError(f"unknown node {dst}")
    paths = shortest_paths_from(view, src)
    if dst not in paths:
        raise UnreachableError(f"{dst} is unreachable from {src}")
    path = paths[dst]
    return Route(path, view.path_reward(path))


def solve_all(view: WeightedView, snapshot_time: float = 0.0) -> RouteTable:
    t = view.topology
    table = RouteTable.empty_for(t, snapshot_time)
    for src in t.nodes:
        paths = shortest_paths_from(view, src)
        for dst in t.nodes:
            if dst == src:
                continue
            if dst in paths:
                table.routes[(src, dst)] = Route(paths[dst], view.path_reward(paths[dst]))
            else:
                table.unreachable.add((src, dst))
    return table


@dataclass(frozen=True)
class PairCheck:
    src: int
    dst: int
    learned: tuple[int, ...] | None
    learned_cost: float | None
    optimal: tuple[int, ...] | None
    optimal_cost: float | None
    reason: str = ""


@dataclass
class VerificationReport:
    checked: int = 0
    failures: list[PairCheck] = field(default_factory=list)
    ties: list[PairCheck] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def failed_pairs(self) -> set[Pair]:
        return {(f.src, f.dst) for f in self.failures}

    def summary(self) -> str:
        return (
            f"checked {self.checked} pairs: {len(self.failures)} failures, "
            f"{len(self.ties)} equal-cost ties"
        )


def verify_policy(route_table: RouteTable, view: WeightedView) -> VerificationReport:
    """Compare every learned route with the optimum.

    Learned costs are recomputed from ``view`` along the learned path, so a
    route table's stored rewards cannot mask a bad path. Costs are
    exactly-rounded sums, hence compared without tolerance.
    """
    t = view.topology
    if route_table.nodes != t.nodes:
        raise TopologyError("route table and view cover different node sets")
    report = VerificationReport()
    optimal = {src: shortest_paths_from(view, src) for src in t.nodes}
    for src, dst in route_table.pairs():
        report.checked += 1
        best = optimal[src].get(dst)
        best_cost = None if best is None else view.path_reward(best)
        route = route_table.routes.get((src, dst))
        if route is None:
            if best is None and (src, dst) in route_table.unreachable:
                continue
            reason = route_table.failures.get((src, dst), "missing route")
            report.failures.append(PairCheck(src, dst, None, None, best, _cost(best_cost), reason))
            continue
        if best is None:
            report.failures.append(
                PairCheck(src, dst, route.path, None, None, None, "route to unreachable node")
            )
            continue
        try:
            learned_reward = _walk_reward(view, route.path, src, dst)
        except ValueError as exc:
            report.failures.append(
                PairCheck(src, dst, route.path, None, best, _cost(best_cost), str(exc))
            )
            continue
        check = PairCheck(src, dst, route.path, _cost(learned_reward), best, _cost(best_cost))
        if learned_reward < best_cost:
            report.failures.append(
                PairCheck(**{**check.__dict__, "reason": "cost above optimum"})
            )
        elif route.path != best:
            report.ties.append(check)
    return report


def _cost(reward: float | None) -> float | None:
    return None if reward is None else -reward + 0.0


def _walk_reward(view: WeightedView, path: tuple[int, ...], src: int, dst: int) -> float:
    if not path or path[0] != src or path[-1] != dst:
        raise ValueError("path endpoints do not match pair")
    if len(set(path)) != len(path):
        raise ValueError("path repeats a node")
    for u, v in zip(path, path[1:]):
        if not view.topology.has_link(u, v):
            raise ValueError(f"path uses missing link {u}-{v}")
    return view.path_reward(path)
