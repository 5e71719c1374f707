"""Link telemetry, latency penalties and the reward matrix R(s, a).

All penalties are in microseconds. A link's penalty is the sum of a
propagation term (5 us/km), an M/M/1 sojourn term (1 us / (1 - load)) and a
stepped pre-FEC BER term.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Iterable, Iterator, Mapping

import numpy as np

from rlroute.topology import LinkKey, Topology, link_key


class TelemetryError(ValueError):
    """Telemetry value outside its domain, or not matching the topology."""


@dataclass(frozen=True)
class LinkTelemetry:
    load: float = 0.0
    ber: float = 0.0

    def __post_init__(self) -> None:
        _check_load(self.load)
        _check_ber(self.ber)


def _check_load(load: float) -> None:
    if not (0.0 <= load < 1.0):
        raise TelemetryError(f"load must lie in [0, 1), got {load}")


def _check_ber(ber: float) -> None:
    if not (0.0 <= ber <= 1.0):
        raise TelemetryError(f"ber must lie in [0, 1], got {ber}")


@dataclass(frozen=True)
class RewardModel:
    """Penalty constants.

    ``ber_tiers`` is a list of ``(threshold, penalty_us, inclusive)`` in
    strictly decreasing threshold order; the first tier whose threshold the
    BER reaches (``>=`` when inclusive, ``>`` otherwise) applies, else
    ``ber_floor_penalty_us``.
    """

    propagation_us_per_km: float = 5.0
    service_time_us: float = 1.0
    ber_tiers: tuple[tuple[float, float, bool], ...] = ((1e-4, 1000.0, True), (1e-5, 50.0, False))
    ber_floor_penalty_us: float = 0.0
    # Optional capacity-derived service time (packet_bits / capacity); off by default.
    packet_bits: float | None = None

    def __post_init__(self) -> None:
        thresholds = [t for t, _, _ in self.ber_tiers]
        if any(b >= a for a, b in zip(thresholds, thresholds[1:])):
            raise ValueError("BER tier thresholds must be strictly decreasing")
        if any(p < 0 for _, p, _ in self.ber_tiers) or self.ber_floor_penalty_us < 0:
            raise ValueError("BER penalties must be non-negative")
        if self.propagation_us_per_km < 0 or self.service_time_us <= 0:
            raise ValueError("propagation coefficient must be >= 0 and service time > 0")

    def service_time_for(self, capacity_bps: float) -> float:
        if self.packet_bits is None:
            return self.service_time_us
        return self.packet_bits / capacity_bps * 1e6


DEFAULT_MODEL = RewardModel()


def ber_penalty(model: RewardModel, ber: float) -> float:
    _check_ber(ber)
    for threshold, penalty, inclusive in model.ber_tiers:
        if ber > threshold or (inclusive and ber == threshold):
            return penalty
    return model.ber_floor_penalty_us


def queuing_penalty(model: RewardModel, load: float, service_time_us: float | None = None) -> float:
    """Mean M/M/1 sojourn time; raises on ``load >= 1`` instead of capping."""
    _check_load(load)
    service = model.service_time_us if service_time_us is None else service_time_us
    return service / (1.0 - load)


def link_penalty(
    model: RewardModel,
    distance_km: float,
    tel: LinkTelemetry,
    capacity_bps: float | None = None,
) -> float:
    if distance_km < 0:
        raise TelemetryError(f"negative distance {distance_km}")
    service = None if capacity_bps is None else model.service_time_for(capacity_bps)
    return (
        model.propagation_us_per_km * distance_km
        + queuing_penalty(model, tel.load, service)
        + ber_penalty(model, tel.ber)
    )


@dataclass(frozen=True)
class TelemetryEvent:
    """Single-field update of one link at ``time`` seconds."""

    time: float
    link: LinkKey
    field: str
    value: float

    def __post_init__(self) -> None:
        if self.field not in ("load", "ber"):
            raise TelemetryError(f"event field must be 'load' or 'ber', got {self.field!r}")
        if self.time < 0:
            raise TelemetryError(f"event time must be non-negative, got {self.time}")
        object.__setattr__(self, "link", link_key(*self.link))

    def to_record(self) -> dict[str, Any]:
        return {"t": self.time, "a": self.link[0], "b": self.link[1],
                "field": self.field, "value": self.value}


@dataclass(frozen=True)
class TelemetrySnapshot:
    """Per-link telemetry at ``timestamp``; keys are canonical link keys."""

    links: Mapping[LinkKey, LinkTelemetry]
    timestamp: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "links", {link_key(*k): v for k, v in sorted(self.links.items())}
        )

    def __getitem__(self, key: LinkKey) -> LinkTelemetry:
        try:
            return self.links[link_key(*key)]
        except KeyError:
            raise TelemetryError(f"no telemetry for link {key[0]}-{key[1]}") from None

    def __iter__(self) -> Iterator[LinkKey]:
        return iter(self.links)

    def __len__(self) -> int:
        return len(self.links)

    @classmethod
    def uniform(
        cls, t: Topology, load: float = 0.0, ber: float = 0.0, timestamp: float = 0.0
    ) -> TelemetrySnapshot:
        tel = LinkTelemetry(load, ber)
        return cls({link.key: tel for link in t.links}, timestamp)

    def check_covers(self, t: Topology) -> None:
        expected = {link.key for link in t.links}
        missing = expected - self.links.keys()
        if missing:
            a, b = min(missing)
            raise TelemetryError(f"missing telemetry for link {a}-{b}")
        extra = self.links.keys() - expected
        if extra:
            a, b = min(extra)
            raise TelemetryError(f"telemetry for unknown link {a}-{b}")

    def to_document(self) -> dict[str, Any]:
        return {
            "timestamp": self.timestamp,
            "telemetry": [
                {"a": a, "b": b, "load": v.load, "ber": v.ber} for (a, b), v in self.links.items()
            ],
        }


def apply_event(snap: TelemetrySnapshot, ev: TelemetryEvent) -> TelemetrySnapshot:
    """Return a new snapshot with one field of one link replaced."""
    if ev.link not in snap.links:
        raise TelemetryError(f"event on unknown link {ev.link[0]}-{ev.link[1]}")
    if ev.time < snap.timestamp:
        raise TelemetryError(f"event time {ev.time} precedes snapshot time {snap.timestamp}")
    updated = replace(snap.links[ev.link], **{ev.field: ev.value})
    links = dict(snap.links)
    links[ev.link] = updated
    return TelemetrySnapshot(links, ev.time)


@dataclass(frozen=True)
class RewardMatrix:
    """Immediate rewards ``R(s, a) = -link_penalty`` for every directed adjacency.

    ``values`` is laid out on the topology's CSR slots.
    """

    topology: Topology
    values: np.ndarray = field(repr=False)

    def __getitem__(self, pair: tuple[int, int]) -> float:
        return float(self.values[self.topology.slot(*pair)])

    def __len__(self) -> int:
        return len(self.values)

    def entries(self) -> dict[tuple[int, int], float]:
        indptr, targets = self.topology.csr
        nodes = self.topology.nodes
        out = {}
        for i, s in enumerate(nodes):
            for k in range(indptr[i], indptr[i + 1]):
                out[(s, nodes[targets[k]])] = float(self.values[k])
        return out

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RewardMatrix):
            return NotImplemented
        return self.topology == other.topology and np.array_equal(self.values, other.values)

    __hash__ = None  # type: ignore[assignment]


def link_penalties(
    t: Topology, snap: TelemetrySnapshot, model: RewardModel = DEFAULT_MODEL
) -> dict[LinkKey, float]:
    snap.check_covers(t)
    return {
        link.key: link_penalty(model, link.distance_km, snap.links[link.key], link.capacity_bps)
        for link in t.links
    }


def build_reward_matrix(
    t: Topology, snap: TelemetrySnapshot, model: RewardModel = DEFAULT_MODEL
) -> RewardMatrix:
    penalties = link_penalties(t, snap, model)
    indptr, targets = t.csr
    values = np.empty(len(targets), dtype=np.float64)
    for i, s in enumerate(t.nodes):
        for k in range(indptr[i], indptr[i + 1]):
            values[k] = -penalties[link_key(s, t.nodes[targets[k]])]
    values.flags.writeable = False
    return RewardMatrix(t, values)


def parse_telemetry(doc: Mapping[str, Any], t: Topology | None = None) -> TelemetrySnapshot:
    if not isinstance(doc, Mapping) or "telemetry" not in doc:
        raise TelemetryError("telemetry document must be an object with a 'telemetry' list")
    links: dict[LinkKey, LinkTelemetry] = {}
    for i, entry in enumerate(doc["telemetry"]):
        try:
            key = link_key(int(entry["a"]), int(entry["b"]))
            tel = LinkTelemetry(float(entry.get("load", 0.0)), float(entry.get("ber", 0.0)))
        except (KeyError, TypeError) as exc:
            raise TelemetryError(f"telemetry[{i}]: malformed entry ({exc})") from None
        except TelemetryError as exc:
            raise TelemetryError(f"telemetry[{i}]: {exc}") from None
        if key in links:
            raise TelemetryError(f"telemetry[{i}]: duplicate link {key[0]}-{key[1]}")
        links[key] = tel
    snap = TelemetrySnapshot(links, float(doc.get("timestamp", 0.0)))
    if t is not None:
        snap.check_covers(t)
    return snap


def load_telemetry(source: str | Path | Mapping[str, Any], t: Topology | None = None) -> TelemetrySnapshot:
    if isinstance(source, Mapping):
        return parse_telemetry(source, t)
    try:
        doc = json.loads(Path(source).read_text())
    except json.JSONDecodeError as exc:
        raise TelemetryError(f"{source}: line {exc.lineno}: {exc.msg}") from None
    return parse_telemetry(doc, t)


def parse_event(record: Mapping[str, Any]) -> TelemetryEvent:
    try:
        return TelemetryEvent(
            float(record["t"]), (int(record["a"]), int(record["b"])),
            str(record["field"]), float(record["value"]),
        )
    except KeyError as exc:
        raise TelemetryError(f"event record missing {exc}") from None


def read_events(lines: Iterable[str]) -> list[TelemetryEvent]:
    """Parse a JSON-lines event stream; blank lines and ``#`` comments are skipped."""
    events = []
    for lineno, line in enumerate(lines, 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            events.append(parse_event(json.loads(line)))
        except (json.JSONDecodeError, TelemetryError, ValueError) as exc:
            raise TelemetryError(f"line {lineno}: {exc}") from None
    return events


def load_events(path: str | Path) -> list[TelemetryEvent]:
    with open(path) as fh:
        return read_events(fh)
