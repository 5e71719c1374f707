"""Network graph model: nodes, bidirectional links and adjacency queries."""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any, Iterable, Mapping

import numpy as np

DEFAULT_CAPACITY_BPS = 10e9

LinkKey = tuple[int, int]


class TopologyError(ValueError):
    """Invalid topology document or query."""


def link_key(a: int, b: int) -> LinkKey:
    """Canonical (unordered) key for the link between ``a`` and ``b``."""
    return (a, b) if a < b else (b, a)


@dataclass(frozen=True, order=True)
class Link:
    a: int
    b: int
    distance_km: float = 0.0
    capacity_bps: float = DEFAULT_CAPACITY_BPS

    def __post_init__(self) -> None:
        if self.a == self.b:
            raise TopologyError(f"self-loop on node {self.a}")
        if self.distance_km < 0:
            raise TopologyError(f"negative distance on link {self.a}-{self.b}")
        if self.capacity_bps <= 0:
            raise TopologyError(f"non-positive capacity on link {self.a}-{self.b}")
        # store endpoints canonically so equal links compare equal
        if self.a > self.b:
            a, b = self.b, self.a
            object.__setattr__(self, "a", a)
            object.__setattr__(self, "b", b)

    @property
    def key(self) -> LinkKey:
        return (self.a, self.b)

    def other(self, node: int) -> int:
        if node == self.a:
            return self.b
        if node == self.b:
            return self.a
        raise TopologyError(f"node {node} is not an endpoint of link {self.a}-{self.b}")


@dataclass(frozen=True)
class Topology:
    """Immutable undirected simple graph.

    ``adjacency`` maps each node to its ``(neighbor, link)`` pairs sorted by
    ascending neighbor id; every tie-break in the package relies on that order.
    """

    nodes: tuple[int, ...]
    links: tuple[Link, ...]
    adjacency: Mapping[int, tuple[tuple[int, Link], ...]] = field(
        init=False, repr=False, compare=False
    )

    def __post_init__(self) -> None:
        nodes = tuple(sorted(self.nodes))
        if len(set(nodes)) != len(nodes):
            raise TopologyError("duplicate node id")
        links = tuple(sorted(self.links))
        node_set = set(nodes)
        adj: dict[int, list[tuple[int, Link]]] = {n: [] for n in nodes}
        seen: set[LinkKey] = set()
        for link in links:
            for end in (link.a, link.b):
                if end not in node_set:
                    raise TopologyError(f"link {link.a}-{link.b}: unknown endpoint {end}")
            if link.key in seen:
                raise TopologyError(f"duplicate link {link.a}-{link.b}")
            seen.add(link.key)
            adj[link.a].append((link.b, link))
            adj[link.b].append((link.a, link))
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "links", links)
        object.__setattr__(
            self, "adjacency", {n: tuple(sorted(v, key=lambda p: p[0])) for n, v in adj.items()}
        )

    @classmethod
    def from_edges(
        cls, edges: Iterable[tuple[int, int, float]], nodes: Iterable[int] | None = None
    ) -> Topology:
        """Build from ``(a, b, distance_km)`` triples; nodes default to the endpoints."""
        links = [Link(a, b, float(d)) for a, b, d in edges]
        if nodes is None:
            nodes = sorted({n for link in links for n in link.key})
        return cls(tuple(nodes), tuple(links))

    def __contains__(self, node: object) -> bool:
        return node in self.adjacency

    def __len__(self) -> int:
        return len(self.nodes)

    @cached_property
    def _link_index(self) -> dict[LinkKey, Link]:
        return {link.key: link for link in self.links}

    def link(self, a: int, b: int) -> Link:
        try:
            return self._link_index[link_key(a, b)]
        except KeyError:
            raise TopologyError(f"no link {a}-{b}") from None

    def has_link(self, a: int, b: int) -> bool:
        return link_key(a, b) in self._link_index

    @cached_property
    def index(self) -> dict[int, int]:
        """Position of each node id in ``nodes``."""
        return {n: i for i, n in enumerate(self.nodes)}

    @cached_property
    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        """Compressed adjacency ``(indptr, neighbor_index)`` over node positions.

        Slot ``k`` in ``indptr[i]:indptr[i+1]`` is the directed pair
        ``(nodes[i], nodes[neighbor_index[k]])``; order follows ``adjacency``.
        """
        indptr = np.zeros(len(self.nodes) + 1, dtype=np.int64)
        targets: list[int] = []
        for i, n in enumerate(self.nodes):
            targets.extend(self.index[m] for m, _ in self.adjacency[n])
            indptr[i + 1] = len(targets)
        return indptr, np.asarray(targets, dtype=np.int64)

    def slot(self, s: int, a: int) -> int:
        """CSR slot of the directed pair ``(s, a)``."""
        indptr, targets = self.csr
        i = self._require(s)
        j = self.index.get(a)
        lo, hi = int(indptr[i]), int(indptr[i + 1])
        if j is not None:
            k = lo + int(np.searchsorted(targets[lo:hi], j))
            if k < hi and targets[k] == j:
                return k
        raise TopologyError(f"{s}->{a} is not an adjacency")

    def _require(self, node: int) -> int:
        try:
            return self.index[node]
        except KeyError:
            raise TopologyError(f"unknown node {node}") from None

    def to_document(self) -> dict[str, Any]:
        return {
            "nodes": list(self.nodes),
            "links": [
                {"a": l.a, "b": l.b, "distance_km": l.distance_km, "capacity_bps": l.capacity_bps}
                for l in self.links
            ],
        }


def neighbors(t: Topology, s: int) -> list[int]:
    """Ascending neighbor ids of ``s``; these are the actions available at ``s``."""
    if s not in t.adjacency:
        raise TopologyError(f"unknown node {s}")
    return [m for m, _ in t.adjacency[s]]


def connectivity_report(t: Topology) -> list[list[int]]:
    """Connected components, each sorted, ordered by smallest member."""
    seen: set[int] = set()
    components = []
    for start in t.nodes:
        if start in seen:
            continue
        seen.add(start)
        comp = [start]
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for v, _ in t.adjacency[u]:
                if v not in seen:
                    seen.add(v)
                    comp.append(v)
                    queue.append(v)
        components.append(sorted(comp))
    return components


def _positive_int(value: Any, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value <= 0:
        raise TopologyError(f"{where}: node id must be a positive integer, got {value!r}")
    return value


def parse_topology(doc: Mapping[str, Any]) -> Topology:
    """Validate a topology document (already decoded) and build the graph."""
    if not isinstance(doc, Mapping):
        raise TopologyError("topology document must be an object")
    raw_nodes = doc.get("nodes")
    if not raw_nodes:
        raise TopologyError("no nodes")
    nodes = []
    seen = set()
    for i, n in enumerate(raw_nodes):
        n = _positive_int(n, f"nodes[{i}]")
        if n in seen:
            raise TopologyError(f"nodes[{i}]: duplicate node id {n}")
        seen.add(n)
        nodes.append(n)

    links = []
    pairs: set[LinkKey] = set()
    for i, entry in enumerate(doc.get("links", [])):
        where = f"links[{i}]"
        try:
            a = _positive_int(entry["a"], where)
            b = _positive_int(entry["b"], where)
        except (KeyError, TypeError):
            raise TopologyError(f"{where}: missing endpoint 'a' or 'b'") from None
        if a == b:
            raise TopologyError(f"{where}: self-loop on node {a}")
        for end in (a, b):
            if end not in seen:
                raise TopologyError(f"{where}: unknown endpoint {end}")
        if link_key(a, b) in pairs:
            raise TopologyError(f"{where}: duplicate link {a}-{b}")
        pairs.add(link_key(a, b))
        distance = float(entry.get("distance_km", 0.0))
        if distance < 0:
            raise TopologyError(f"{where}: negative distance {distance}")
        capacity = float(entry.get("capacity_bps", DEFAULT_CAPACITY_BPS))
        try:
            links.append(Link(a, b, distance, capacity))
        except TopologyError as exc:
            raise TopologyError(f"{where}: {exc}") from None
    return Topology(tuple(nodes), tuple(links))


def load_topology(source: str | Path | Mapping[str, Any]) -> Topology:
    """Load a topology from a JSON file path, JSON text, or decoded mapping."""
    if isinstance(source, Mapping):
        return parse_topology(source)
    text = Path(source).read_text() if _looks_like_path(source) else str(source)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TopologyError(f"line {exc.lineno}: {exc.msg}") from None
    return parse_topology(doc)


def _looks_like_path(source: str | Path) -> bool:
    return isinstance(source, Path) or not str(source).lstrip().startswith("{")
