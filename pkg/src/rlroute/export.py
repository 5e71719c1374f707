"""Route-table serialization: grid table, flat CSV, JSON, and text reports."""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Any, Iterable, Mapping

from rlroute.engine import PolicyDiff
from rlroute.routes import Pair, Route, RouteTable

FORMATS = ("matrix-table", "flat-csv", "structured")


def fmt_reward(value: float) -> str:
    # + 0.0 folds -0.0 into 0.0
    return f"{value + 0.0:.2f}"


def fmt_path(path: Iterable[int] | None) -> str:
    return "unreachable" if path is None else "-".join(map(str, path))


def _cell(rt: RouteTable, src: int, dst: int) -> str:
    if src == dst:
        return "-"
    route = rt.routes.get((src, dst))
    if route is not None:
        return route.label()
    if (src, dst) in rt.failures:
        return "no-convergence"
    return "unreachable"


def matrix_table(rt: RouteTable, label: str = "primary") -> str:
    """Source x destination grid of dash-joined paths, diagonal ``-``."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["Source", "Path", *rt.nodes])
    for src in rt.nodes:
        w.writerow([src, label, *(_cell(rt, src, dst) for dst in rt.nodes)])
    return buf.getvalue()


def flat_csv(rt: RouteTable) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["src", "dst", "path", "total_reward", "hops", "status"])
    for src, dst in rt.pairs():
        route = rt.routes.get((src, dst))
        if route is not None:
            w.writerow([src, dst, route.label(), fmt_reward(route.total_reward),
                        len(route.path) - 1, "ok"])
        else:
            status = "no-convergence" if (src, dst) in rt.failures else "unreachable"
            w.writerow([src, dst, "", "", "", status])
    return buf.getvalue()


def to_document(rt: RouteTable) -> dict[str, Any]:
    return {
        "nodes": list(rt.nodes),
        "links": [list(l) for l in rt.links],
        "snapshot_time": rt.snapshot_time,
        "routes": [
            {"src": s, "dst": d, "path": list(r.path), "total_reward": r.total_reward}
            for (s, d), r in sorted(rt.routes.items())
        ],
        "unreachable": [list(p) for p in sorted(rt.unreachable)],
        "failures": [{"src": s, "dst": d, "reason": m} for (s, d), m in sorted(rt.failures.items())],
    }


def from_document(doc: Mapping[str, Any]) -> RouteTable:
    try:
        return RouteTable(
            nodes=tuple(int(n) for n in doc["nodes"]),
            links=tuple((int(a), int(b)) for a, b in doc["links"]),
            routes={
                (int(r["src"]), int(r["dst"])): Route(tuple(int(n) for n in r["path"]),
                                                      float(r["total_reward"]))
                for r in doc["routes"]
            },
            unreachable={(int(a), int(b)) for a, b in doc.get("unreachable", [])},
            failures={(int(f["src"]), int(f["dst"])): str(f["reason"])
                      for f in doc.get("failures", [])},
            snapshot_time=float(doc.get("snapshot_time", 0.0)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed route-table document: {exc!r}") from None


def dumps_structured(rt: RouteTable) -> str:
    return json.dumps(to_document(rt), indent=2) + "\n"


def load_route_table(path: str | Path) -> RouteTable:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: line {exc.lineno}: {exc.msg}") from None
    return from_document(doc)


def render(rt: RouteTable, fmt: str, label: str = "primary") -> str:
    if fmt == "matrix-table":
        return matrix_table(rt, label)
    if fmt == "flat-csv":
        return flat_csv(rt)
    if fmt == "structured":
        return dumps_structured(rt)
    raise ValueError(f"unknown format {fmt!r}; choose from {', '.join(FORMATS)}")


def report_lines(rt: RouteTable, pairs: Iterable[Pair] | None = None) -> list[str]:
    """``"<path>  <reward>"`` per pair, e.g. ``1-6-7-22  -123.55``."""
    if pairs is None:
        pairs = rt.pairs()
    lines = []
    known = set(rt.pairs())
    for src, dst in pairs:
        if src == dst and src in rt.nodes:
            lines.append(f"{src}  {fmt_reward(0.0)}")
            continue
        if (src, dst) not in known:
            raise KeyError(
                f"pair {src}->{dst} not in route table ({len(known)} valid pairs)"
            )
        route = rt.routes.get((src, dst))
        if route is None:
            lines.append(f"{_cell(rt, src, dst)}  n/a")
        else:
            lines.append(f"{route.label()}  {fmt_reward(route.total_reward)}")
    return lines


def diff_lines(diff: PolicyDiff) -> list[str]:
    lines = [
        f"# t={diff.time:g} changed={diff.changed} unchanged={diff.unchanged} "
        f"newly_unreachable={diff.newly_unreachable}"
    ]
    for e in diff.entries:
        old = f"{fmt_path(e.old_path)} ({'n/a' if e.old_reward is None else fmt_reward(e.old_reward)})"
        new = f"{fmt_path(e.new_path)} ({'n/a' if e.new_reward is None else fmt_reward(e.new_reward)})"
        lines.append(f"{e.src}->{e.dst}: {old} => {new}")
    return lines


def diff_record(diff: PolicyDiff) -> dict[str, Any]:
    return {
        "time": diff.time,
        "changed": diff.changed,
        "unchanged": diff.unchanged,
        "newly_unreachable": diff.newly_unreachable,
        "entries": [
            {"src": e.src, "dst": e.dst,
             "old_path": None if e.old_path is None else list(e.old_path),
             "new_path": None if e.new_path is None else list(e.new_path),
             "old_reward": e.old_reward, "new_reward": e.new_reward}
            for e in diff.entries
        ],
    }
