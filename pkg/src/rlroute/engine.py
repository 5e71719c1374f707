"""Closed-loop controller: apply telemetry events, re-solve, publish diffs."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Iterable, Literal, Mapping

from rlroute import oracle, qlearning
from rlroute.qlearning import Hyperparams, QTable
from rlroute.routes import Pair, RouteTable
from rlroute.telemetry import (
    DEFAULT_MODEL,
    RewardModel,
    TelemetryEvent,
    TelemetrySnapshot,
    apply_event,
    build_reward_matrix,
)
from rlroute.topology import Topology, TopologyError

log = logging.getLogger(__name__)

Solver = Literal["q", "oracle"]


@dataclass(frozen=True)
class DiffEntry:
    src: int
    dst: int
    old_path: tuple[int, ...] | None
    new_path: tuple[int, ...] | None
    old_reward: float | None
    new_reward: float | None


@dataclass(frozen=True)
class PolicyDiff:
    entries: tuple[DiffEntry, ...]
    unchanged: int
    time: float = 0.0

    @property
    def changed(self) -> int:
        return len(self.entries)

    @property
    def newly_unreachable(self) -> int:
        return sum(1 for e in self.entries if e.new_path is None and e.old_path is not None)

    def pairs(self) -> set[Pair]:
        return {(e.src, e.dst) for e in self.entries}

    def __bool__(self) -> bool:
        return bool(self.entries)


def diff_route_tables(old: RouteTable, new: RouteTable, time: float = 0.0) -> PolicyDiff:
    """Entries for exactly the pairs whose path sequence differs."""
    if not old.same_network(new):
        raise TopologyError("route tables describe different topologies")
    entries = []
    unchanged = 0
    for src, dst in old.pairs():
        a, b = old.routes.get((src, dst)), new.routes.get((src, dst))
        pa, pb = (a.path if a else None), (b.path if b else None)
        if pa == pb:
            unchanged += 1
            continue
        entries.append(DiffEntry(
            src, dst, pa, pb,
            a.total_reward if a else None, b.total_reward if b else None,
        ))
    return PolicyDiff(tuple(entries), unchanged, time)


@dataclass(frozen=True)
class EngineState:
    topology: Topology
    snapshot: TelemetrySnapshot
    routes: RouteTable
    solver: Solver = "q"
    hyperparams: Hyperparams = Hyperparams()
    model: RewardModel = DEFAULT_MODEL
    warm_start: bool = False
    event_log: tuple[TelemetryEvent, ...] = ()
    q_tables: Mapping[int, QTable] | None = field(default=None, repr=False, compare=False)

    @classmethod
    def initial(
        cls,
        topology: Topology,
        snapshot: TelemetrySnapshot,
        solver: Solver = "q",
        hyperparams: Hyperparams = Hyperparams(),
        model: RewardModel = DEFAULT_MODEL,
        warm_start: bool = False,
    ) -> EngineState:
        routes, tables = _solve(topology, snapshot, solver, hyperparams, model, None)
        return cls(topology, snapshot, routes, solver, hyperparams, model, warm_start, (), tables)


def _solve(
    t: Topology,
    snap: TelemetrySnapshot,
    solver: Solver,
    hp: Hyperparams,
    model: RewardModel,
    warm: Mapping[int, QTable] | None,
) -> tuple[RouteTable, dict[int, QTable] | None]:
    if solver == "oracle":
        view = oracle.WeightedView.from_telemetry(t, snap, model)
        return oracle.solve_all(view, snap.timestamp), None
    if solver != "q":
        raise ValueError(f"unknown solver {solver!r}")
    R = build_reward_matrix(t, snap, model)
    tables = qlearning.train_all(t, R, hp, warm)
    return qlearning.routes_from_tables(t, tables, snap.timestamp), tables


def _advance(state: EngineState, events: list[TelemetryEvent]) -> tuple[EngineState, PolicyDiff]:
    snap = state.snapshot
    for ev in events:
        snap = apply_event(snap, ev)
    warm = state.q_tables if state.warm_start else None
    routes, tables = _solve(state.topology, snap, state.solver, state.hyperparams, state.model, warm)
    if routes.snapshot_time < state.routes.snapshot_time:
        raise RuntimeError("route table would be tagged with an older snapshot")
    diff = diff_route_tables(state.routes, routes, snap.timestamp)
    new_state = replace(
        state, snapshot=snap, routes=routes,
        event_log=state.event_log + tuple(events), q_tables=tables,
    )
    return new_state, diff


def step(state: EngineState, ev: TelemetryEvent) -> tuple[EngineState, PolicyDiff]:
    """Apply one event and re-solve. On error ``state`` is left as it was."""
    return _advance(state, [ev])


@dataclass
class ReplayResult:
    diffs: list[PolicyDiff]
    state: EngineState
    error: str | None = None
    failed_event: int | None = None

    @property
    def complete(self) -> bool:
        return self.error is None


def _batches(events: list[TelemetryEvent], window: float) -> list[list[TelemetryEvent]]:
    batches: list[list[TelemetryEvent]] = []
    for ev in events:
        if batches and window > 0 and ev.time - batches[-1][0].time <= window:
            batches[-1].append(ev)
        else:
            batches.append([ev])
    return batches


def replay(
    state: EngineState, events: Iterable[TelemetryEvent], batch_window: float = 0.0
) -> ReplayResult:
    """Fold events into the state, one re-solve per batch.

    Events within ``batch_window`` seconds of a batch's first event are
    coalesced. The first invalid event stops the replay; diffs produced so
    far are kept and the result is flagged incomplete.
    """
    events = list(events)
    if batch_window < 0:
        raise ValueError("batch_window must be non-negative")
    diffs: list[PolicyDiff] = []
    done = 0
    for batch in _batches(events, batch_window):
        try:
            state, diff = _advance(state, batch)
        except (ValueError, TopologyError) as exc:
            # locate the offending event within the batch
            bad = done
            snap = state.snapshot
            for i, ev in enumerate(batch):
                try:
                    snap = apply_event(snap, ev)
                except ValueError:
                    bad = done + i
                    break
            log.warning("replay stopped at event %d: %s", bad, exc)
            return ReplayResult(diffs, state, str(exc), bad)
        diffs.append(diff)
        done += len(batch)
    return ReplayResult(diffs, state)


def revert_check(before: EngineState, after: EngineState) -> bool:
    """True iff ``after`` publishes the same routes (paths and rewards) as ``before``."""
    a, b = before.routes, after.routes
    return (
        a.same_network(b)
        and a.routes == b.routes
        and a.unreachable == b.unreachable
        and a.failures.keys() == b.failures.keys()
    )
