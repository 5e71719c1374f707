"""Bundled 8-node and Tokyo (23-node) fixtures.

Each fixture directory holds ``topology.json``, ``telemetry_nominal.json``,
``telemetry_degraded.json`` and the degradation event stream ``events.jsonl``.
"""

from __future__ import annotations

from pathlib import Path

ROOT = Path(__file__).resolve().parent
NAMES = ("eight_node", "tokyo")


def path(name: str, filename: str = "topology.json") -> Path:
    if name not in NAMES:
        raise KeyError(f"unknown fixture {name!r}; choose from {', '.join(NAMES)}")
    return ROOT / name / filename
