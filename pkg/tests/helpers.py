"""Shared test utilities: random telemetry graphs and a brute-force path oracle."""

from __future__ import annotations

import math

import numpy as np

from rlroute.telemetry import LinkTelemetry, TelemetrySnapshot
from rlroute.topology import Topology, link_key

# one representative BER per tier: clean, 50 us, 1000 us
BER_TIERS = (1e-6, 5e-5, 1e-3)


def random_network(rng: np.random.Generator, n_min: int = 8, n_max: int = 30):
    """Connected random graph (random spanning tree plus extra chords) with random telemetry."""
    n = int(rng.integers(n_min, n_max + 1))
    order = rng.permutation(n) + 1
    edges: set[tuple[int, int]] = set()
    for i in range(1, n):
        j = int(rng.integers(0, i))
        edges.add(link_key(int(order[i]), int(order[j])))
    extra = min(int(rng.integers(0, n + 1)), n * (n - 1) // 2 - len(edges))
    while extra:
        a, b = (int(x) + 1 for x in rng.choice(n, 2, replace=False))
        if link_key(a, b) not in edges:
            edges.add(link_key(a, b))
            extra -= 1
    t = Topology.from_edges(
        [(a, b, float(rng.uniform(0.5, 60.0))) for a, b in sorted(edges)], range(1, n + 1)
    )
    snap = TelemetrySnapshot({
        k: LinkTelemetry(float(rng.uniform(0.0, 0.9)), BER_TIERS[int(rng.integers(0, 3))])
        for k in sorted(edges)
    })
    return t, snap


def all_simple_paths(t: Topology, src: int, dst: int):
    stack = [(src, (src,))]
    while stack:
        node, path = stack.pop()
        if node == dst:
            yield path
            continue
        for nxt, _ in t.adjacency[node]:
            if nxt not in path:
                stack.append((nxt, path + (nxt,)))


def brute_force_costs(t: Topology, weights: dict) -> dict:
    """(src, dst) -> sorted list of (cost, path) over every simple path."""
    out = {}
    for s in t.nodes:
        for d in t.nodes:
            if s != d:
                out[(s, d)] = sorted(
                    (math.fsum(weights[link_key(u, v)] for u, v in zip(p, p[1:])), p)
                    for p in all_simple_paths(t, s, d)
                )
    return out
