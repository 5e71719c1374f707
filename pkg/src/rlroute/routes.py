"""Route and route-table value types shared by the solvers."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Mapping

from rlroute.topology import Topology

Pair = tuple[int, int]


class RoutingError(Exception):
    """Base class for per-pair route extraction failures."""


class UnreachableError(RoutingError):
    pass


class RouteLoopError(RoutingError):
    """Greedy extraction revisited a node or exceeded its length budget."""


@dataclass(frozen=True)
class Route:
    path: tuple[int, ...]
    total_reward: float

    @property
    def src(self) -> int:
        return self.path[0]

    @property
    def dst(self) -> int:
        return self.path[-1]

    @property
    def cost(self) -> float:
        return -self.total_reward + 0.0

    def label(self) -> str:
        return "-".join(map(str, self.path))


def path_reward(path: Iterable[int], weight: Mapping[Pair, float] | Callable[[int, int], float]) -> float:
    """Negated exactly-rounded sum of link weights along ``path``."""
    path = tuple(path)
    get = weight.__getitem__ if isinstance(weight, Mapping) else weight
    return -math.fsum(get((u, v)) for u, v in zip(path, path[1:])) + 0.0


@dataclass
class RouteTable:
    """Policy extracted for every ordered (src, dst) pair with src != dst.

    Pairs without a route are listed in ``unreachable`` (no path exists) or
    ``failures`` (a path exists but extraction did not converge).
    """

    nodes: tuple[int, ...]
    links: tuple[Pair, ...]
    routes: dict[Pair, Route] = field(default_factory=dict)
    unreachable: set[Pair] = field(default_factory=set)
    failures: dict[Pair, str] = field(default_factory=dict)
    snapshot_time: float = 0.0

    @classmethod
    def empty_for(cls, t: Topology, snapshot_time: float = 0.0) -> RouteTable:
        return cls(t.nodes, tuple(l.key for l in t.links), snapshot_time=snapshot_time)

    def pairs(self) -> Iterator[Pair]:
        for s in self.nodes:
            for d in self.nodes:
                if s != d:
                    yield (s, d)

    def get(self, src: int, dst: int) -> Route | None:
        if src == dst:
            return Route((src,), 0.0)
        return self.routes.get((src, dst))

    def path(self, src: int, dst: int) -> tuple[int, ...] | None:
        route = self.get(src, dst)
        return None if route is None else route.path

    def same_network(self, other: RouteTable) -> bool:
        return self.nodes == other.nodes and self.links == other.links

    @property
    def converged(self) -> bool:
        return not self.failures

    def __len__(self) -> int:
        return len(self.routes)
