"""Tabular Q-learning over per-destination routing MDPs.

Each destination gets its own table: states are nodes, the action at a node
is the neighbor to forward to, transitions are deterministic and the
destination is absorbing with value 0. With gamma = 1 and strictly negative
rewards the optimal greedy policy is the minimum-penalty path.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Any, Mapping

import numpy as np

from rlroute import _kernel
from rlroute.routes import (
    Route,
    RouteLoopError,
    RouteTable,
    RoutingError,
    UnreachableError,
)
from rlroute.telemetry import RewardMatrix
from rlroute.topology import Topology, TopologyError, connectivity_report

__all__ = [
    "Hyperparams",
    "QTable",
    "Route",
    "RouteTable",
    "q_update",
    "run_episode",
    "train",
    "train_all",
    "extract_route",
    "solve_all",
]


@dataclass(frozen=True)
class Hyperparams:
    alpha: float = 0.1
    gamma: float = 1.0
    epsilon_start: float = 1.0
    epsilon_end: float = 0.05
    epsilon_decay: float = 0.999
    episodes: int = 10_000
    # None means 4 * |V|
    max_steps_per_episode: int | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0 < self.alpha <= 1:
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha}")
        if not 0 < self.gamma <= 1:
            raise ValueError(f"gamma must lie in (0, 1], got {self.gamma}")
        for name in ("epsilon_start", "epsilon_end"):
            if not 0 <= getattr(self, name) <= 1:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.epsilon_end > self.epsilon_start:
            raise ValueError("epsilon_end must not exceed epsilon_start")
        if not 0 < self.epsilon_decay <= 1:
            raise ValueError(f"epsilon_decay must lie in (0, 1], got {self.epsilon_decay}")
        if self.episodes < 1:
            raise ValueError("episodes must be positive")
        if self.max_steps_per_episode is not None and self.max_steps_per_episode < 1:
            raise ValueError("max_steps_per_episode must be positive")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")

    def max_steps(self, t: Topology) -> int:
        if self.max_steps_per_episode is not None:
            return self.max_steps_per_episode
        return max(1, 4 * len(t.nodes))

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> Hyperparams:
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown hyperparameters: {', '.join(sorted(unknown))}")
        return cls(**doc)


@dataclass
class QTable:
    """Q-values for one destination, stored on the topology's CSR slots."""

    destination: int
    rewards: RewardMatrix
    values: np.ndarray = field(repr=False)
    visits: np.ndarray = field(repr=False)

    @classmethod
    def zeros(cls, rewards: RewardMatrix, destination: int) -> QTable:
        if destination not in rewards.topology:
            raise TopologyError(f"unknown destination {destination}")
        n = len(rewards.values)
        return cls(destination, rewards, np.zeros(n), np.zeros(n, dtype=np.int64))

    @property
    def topology(self) -> Topology:
        return self.rewards.topology

    def __getitem__(self, pair: tuple[int, int]) -> float:
        return float(self.values[self.topology.slot(*pair)])

    def as_dict(self) -> dict[tuple[int, int], float]:
        t = self.topology
        indptr, targets = t.csr
        return {
            (s, t.nodes[targets[k]]): float(self.values[k])
            for i, s in enumerate(t.nodes)
            for k in range(indptr[i], indptr[i + 1])
        }

    def best_action(self, s: int) -> int | None:
        """Greedy neighbor at ``s`` (lowest id on ties); None for isolated nodes."""
        t = self.topology
        indptr, targets = t.csr
        i = t.index[s]
        lo, hi = int(indptr[i]), int(indptr[i + 1])
        if lo == hi:
            return None
        return t.nodes[targets[_kernel._greedy_slot(self.values, lo, hi)]]

    def state_value(self, s: int) -> float:
        if s == self.destination:
            return 0.0
        a = self.best_action(s)
        return 0.0 if a is None else self[s, a]

    def copy(self) -> QTable:
        return QTable(self.destination, self.rewards, self.values.copy(), self.visits.copy())


def q_update(
    q: QTable, s: int, a: int, r: float, s_next: int, alpha: float, gamma: float
) -> QTable:
    """Apply one Q-learning update to entry ``(s, a)`` in place and return ``q``.

    Q(s,a) += alpha * (r + gamma * max_a' Q(s_next, a') - Q(s,a)), where the
    max over the absorbing destination is 0.
    """
    if s == q.destination:
        raise ValueError(f"destination {s} is absorbing; its row is never updated")
    if s_next != a:
        raise ValueError(f"transitions are deterministic: s_next must equal {a}, got {s_next}")
    k = q.topology.slot(s, a)
    target = r + gamma * q.state_value(s_next)
    q.values[k] += alpha * (target - q.values[k])
    q.visits[k] += 1
    return q


def _starts(t: Topology, dst: int) -> np.ndarray:
    indptr, _ = t.csr
    return np.array(
        [i for i, n in enumerate(t.nodes) if n != dst and indptr[i + 1] > indptr[i]],
        dtype=np.int64,
    )


def destination_rng(seed: int, destination: int) -> np.random.Generator:
    return np.random.default_rng(seed ^ destination)


@dataclass(frozen=True)
class EpisodeTrace:
    path: tuple[int, ...]
    reached: bool

    @property
    def steps(self) -> int:
        return len(self.path) - 1


def run_episode(
    t: Topology,
    R: RewardMatrix,
    q: QTable,
    start: int,
    hp: Hyperparams,
    rng: np.random.Generator,
    epsilon: float | None = None,
) -> tuple[QTable, EpisodeTrace]:
    """One epsilon-greedy episode from ``start``; ``q`` is updated in place.

    ``epsilon`` defaults to ``hp.epsilon_start``. The trace lists visited nodes.
    """
    if R.topology is not t or q.rewards is not R:
        if R.topology != t or q.rewards != R:
            raise ValueError("topology, reward matrix and Q-table do not match")
    if start == q.destination:
        raise ValueError("episode must start away from the destination")
    indptr, targets = t.csr
    si = t.index[start] if start in t else None
    if si is None:
        raise TopologyError(f"unknown node {start}")
    if indptr[si] == indptr[si + 1]:
        raise ValueError(f"start node {start} has no neighbors")
    max_steps = hp.max_steps(t)
    trace = np.empty(max_steps + 1, dtype=np.int64)
    eps = hp.epsilon_start if epsilon is None else epsilon
    dst = t.index[q.destination]
    steps = _kernel.run_episode(
        indptr, targets, R.values, q.values, q.visits, dst, si, eps,
        hp.alpha, hp.gamma, max_steps, rng, trace,
    )
    path = tuple(t.nodes[i] for i in trace[: steps + 1])
    return q, EpisodeTrace(path, path[-1] == q.destination)


def train(
    t: Topology,
    R: RewardMatrix,
    dst: int,
    hp: Hyperparams = Hyperparams(),
    initial: QTable | None = None,
) -> QTable:
    """Train the Q-table for destination ``dst``.

    Episode ``e`` starts from the ``e mod k``-th non-destination node (isolated
    nodes excluded); epsilon decays multiplicatively per episode down to
    ``epsilon_end``. ``initial`` warm-starts from a copy of an earlier table.
    """
    if R.topology != t:
        raise ValueError("reward matrix was built for a different topology")
    q = QTable.zeros(R, dst) if initial is None else _warm(initial, R, dst)
    starts = _starts(t, dst)
    if len(starts) == 0:
        return q
    indptr, targets = t.csr
    _kernel.train(
        indptr, targets, R.values, q.values, q.visits, t.index[dst], starts,
        hp.epsilon_start, hp.epsilon_end, hp.epsilon_decay, hp.alpha, hp.gamma,
        hp.episodes, hp.max_steps(t), destination_rng(hp.seed, dst),
    )
    return q


def _warm(initial: QTable, R: RewardMatrix, dst: int) -> QTable:
    if initial.destination != dst or initial.topology != R.topology:
        raise ValueError("warm-start table does not match destination/topology")
    return QTable(dst, R, initial.values.copy(), np.zeros_like(initial.visits))


def extract_route(q: QTable, src: int, max_len: int | None = None) -> Route:
    """Follow the greedy policy from ``src`` to the table's destination.

    Raises UnreachableError if no path exists and RouteLoopError if the greedy
    walk revisits a node or exceeds ``max_len`` nodes (default |V|).
    """
    t = q.topology
    dst = q.destination
    if src not in t:
        raise TopologyError(f"unknown node {src}")
    if src == dst:
        return Route((src,), 0.0)
    if not _same_component(t, src, dst):
        raise UnreachableError(f"{dst} is unreachable from {src}")
    limit = len(t.nodes) if max_len is None else max_len
    path = [src]
    seen = {src}
    rewards = []
    node = src
    while node != dst:
        a = q.best_action(node)
        if a is None:
            raise UnreachableError(f"node {node} has no neighbors")
        rewards.append(q.rewards[node, a])
        path.append(a)
        if a in seen:
            raise RouteLoopError(f"greedy walk {src}->{dst} revisits node {a}: {_fmt(path)}")
        if len(path) > limit:
            raise RouteLoopError(f"greedy walk {src}->{dst} exceeds {limit} nodes")
        seen.add(a)
        node = a
    return Route(tuple(path), math.fsum(rewards) + 0.0)


def _fmt(path: list[int]) -> str:
    return "-".join(map(str, path))


def _same_component(t: Topology, a: int, b: int) -> bool:
    for comp in _components(t):
        if a in comp:
            return b in comp
    return False


_COMPONENT_CACHE: dict[int, tuple[Topology, list[frozenset[int]]]] = {}


def _components(t: Topology) -> list[frozenset[int]]:
    hit = _COMPONENT_CACHE.get(id(t))
    if hit is None or hit[0] is not t:
        hit = (t, [frozenset(c) for c in connectivity_report(t)])
        _COMPONENT_CACHE.clear()
        _COMPONENT_CACHE[id(t)] = hit
    return hit[1]


def train_all(
    t: Topology,
    R: RewardMatrix,
    hp: Hyperparams = Hyperparams(),
    initial: Mapping[int, QTable] | None = None,
) -> dict[int, QTable]:
    """One table per destination; each uses its own RNG seeded with ``seed ^ dst``."""
    return {
        dst: train(t, R, dst, hp, None if initial is None else initial.get(dst))
        for dst in t.nodes
    }


def routes_from_tables(
    t: Topology, tables: Mapping[int, QTable], snapshot_time: float = 0.0
) -> RouteTable:
    table = RouteTable.empty_for(t, snapshot_time)
    for dst, q in tables.items():
        for src in t.nodes:
            if src == dst:
                continue
            try:
                table.routes[(src, dst)] = extract_route(q, src)
            except UnreachableError:
                table.unreachable.add((src, dst))
            except RoutingError as exc:
                table.failures[(src, dst)] = str(exc)
    return table


def solve_all(
    t: Topology,
    R: RewardMatrix,
    hp: Hyperparams = Hyperparams(),
    snapshot_time: float = 0.0,
) -> RouteTable:
    """Train every destination and extract routes for all ordered pairs.

    Extraction failures are collected in ``RouteTable.failures``.
    """
    return routes_from_tables(t, train_all(t, R, hp), snapshot_time)


def with_overrides(hp: Hyperparams, **changes: Any) -> Hyperparams:
    return replace(hp, **{k: v for k, v in changes.items() if v is not None})
