"""Command-line entry point: validate | solve | oracle | diff | report | replay."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Sequence

from rlroute import engine, export, oracle, qlearning
from rlroute.qlearning import Hyperparams
from rlroute.routes import RouteTable, UnreachableError
from rlroute.telemetry import TelemetryError, build_reward_matrix, load_events, load_telemetry
from rlroute.topology import TopologyError, connectivity_report, load_topology

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CONVERGENCE = 2
EXIT_VERIFY = 3

log = logging.getLogger("rlroute")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # argparse would exit 2, which means "convergence"
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _pair(text: str) -> tuple[int, int]:
    for sep in (":", ",", "-", ">"):
        if sep in text:
            a, b = text.split(sep, 1)
            try:
                return int(a), int(b.lstrip(">"))
            except ValueError:
                break
    raise argparse.ArgumentTypeError(f"expected SRC:DST, got {text!r}")


def _add_hyperparams(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("Q-learning hyperparameters")
    g.add_argument("--config", type=Path, help="JSON document of hyperparameters")
    g.add_argument("--seed", type=int)
    g.add_argument("--alpha", type=float)
    g.add_argument("--gamma", type=float)
    g.add_argument("--epsilon-start", type=float)
    g.add_argument("--epsilon-end", type=float)
    g.add_argument("--epsilon-decay", type=float)
    g.add_argument("--episodes", type=int)
    g.add_argument("--max-steps", type=int, dest="max_steps_per_episode")


def _hyperparams(args: argparse.Namespace) -> Hyperparams:
    hp = Hyperparams()
    if getattr(args, "config", None):
        hp = Hyperparams.from_dict(json.loads(args.config.read_text()))
    return qlearning.with_overrides(
        hp,
        seed=args.seed, alpha=args.alpha, gamma=args.gamma,
        epsilon_start=args.epsilon_start, epsilon_end=args.epsilon_end,
        epsilon_decay=args.epsilon_decay, episodes=args.episodes,
        max_steps_per_episode=args.max_steps_per_episode,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rlroute", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("validate", help="check a topology file and print its components")
    p.add_argument("topology", type=Path)

    p = sub.add_parser("solve", help="compute the routing policy for all pairs")
    p.add_argument("topology", type=Path, nargs="?")
    p.add_argument("telemetry", type=Path, nargs="?")
    p.add_argument("--solver", choices=("q", "oracle"), default="q")
    p.add_argument("--format", choices=export.FORMATS, default="matrix-table")
    p.add_argument("--label", default="primary", help="Path column label in matrix-table output")
    p.add_argument("-o", "--output", type=Path, help="write here instead of stdout")
    p.add_argument("--show-config", action="store_true", help="print hyperparameters and exit")
    _add_hyperparams(p)

    p = sub.add_parser("oracle", help="exact shortest-penalty paths")
    p.add_argument("topology", type=Path)
    p.add_argument("telemetry", type=Path)
    p.add_argument("--src", type=int)
    p.add_argument("--dst", type=int)
    p.add_argument("--all", action="store_true")
    p.add_argument("--verify", type=Path, metavar="ROUTETABLE",
                   help="check a structured route table against the optimum")
    p.add_argument("--format", choices=export.FORMATS, default="flat-csv")

    p = sub.add_parser("diff", help="compare two structured route tables")
    p.add_argument("before", type=Path)
    p.add_argument("after", type=Path)

    p = sub.add_parser("report", help="print path and reward per pair")
    p.add_argument("routetable", type=Path)
    p.add_argument("--pair", type=_pair, action="append", metavar="SRC:DST")

    p = sub.add_parser("replay", help="replay a telemetry event stream")
    p.add_argument("topology", type=Path)
    p.add_argument("telemetry", type=Path)
    p.add_argument("events", type=Path)
    p.add_argument("--solver", choices=("q", "oracle"), default="q")
    p.add_argument("--batch-window", type=float, default=0.0)
    p.add_argument("--warm-start", action="store_true")
    p.add_argument("--diff-log", type=Path, help="write one JSON record per re-solve")
    _add_hyperparams(p)
    return parser


def _load(args: argparse.Namespace):
    t = load_topology(args.topology)
    snap = load_telemetry(args.telemetry, t)
    return t, snap


def _emit(text: str, output: Path | None) -> None:
    if output is None:
        sys.stdout.write(text)
    else:
        output.write_text(text)


def cmd_validate(args: argparse.Namespace) -> int:
    t = load_topology(args.topology)
    comps = connectivity_report(t)
    print(f"{len(t.nodes)} nodes, {len(t.links)} links, {len(comps)} component(s)")
    for i, comp in enumerate(comps, 1):
        print(f"component {i} ({len(comp)} nodes): {' '.join(map(str, comp))}")
    return EXIT_OK


def solve_table(t, snap, solver: str, hp: Hyperparams) -> RouteTable:
    if solver == "oracle":
        return oracle.solve_all(oracle.WeightedView.from_telemetry(t, snap), snap.timestamp)
    return qlearning.solve_all(t, build_reward_matrix(t, snap), hp, snap.timestamp)


def cmd_solve(args: argparse.Namespace) -> int:
    hp = _hyperparams(args)
    if args.show_config:
        print(json.dumps(hp.to_dict(), indent=2))
        return EXIT_OK
    if args.topology is None or args.telemetry is None:
        raise UsageError("solve needs TOPOLOGY and TELEMETRY files")
    t, snap = _load(args)
    rt = solve_table(t, snap, args.solver, hp)
    _emit(export.render(rt, args.format, args.label), args.output)
    for (s, d), reason in sorted(rt.failures.items()):
        print(f"no convergence {s}->{d}: {reason}", file=sys.stderr)
    return EXIT_CONVERGENCE if rt.failures else EXIT_OK


def cmd_oracle(args: argparse.Namespace) -> int:
    t, snap = _load(args)
    view = oracle.WeightedView.from_telemetry(t, snap)
    if args.verify:
        report = oracle.verify_policy(export.load_route_table(args.verify), view)
        print(report.summary())
        for f in report.failures:
            print(f"FAIL {f.src}->{f.dst}: learned {export.fmt_path(f.learned)} "
                  f"cost {f.learned_cost} vs optimal {export.fmt_path(f.optimal)} "
                  f"cost {f.optimal_cost} {f.reason}".rstrip())
        for f in report.ties:
            print(f"TIE  {f.src}->{f.dst}: {export.fmt_path(f.learned)} vs {export.fmt_path(f.optimal)}")
        return EXIT_OK if report.ok else EXIT_VERIFY
    if args.src is not None or args.dst is not None:
        if args.src is None or args.dst is None or args.all:
            raise UsageError("give both --src and --dst, or --all")
        try:
            route = oracle.shortest_path(view, args.src, args.dst)
        except UnreachableError as exc:
            print(f"unreachable: {exc}")
            return EXIT_OK
        print(export.report_lines(_single(t, route), [(args.src, args.dst)])[0])
        return EXIT_OK
    sys.stdout.write(export.render(oracle.solve_all(view, snap.timestamp), args.format))
    return EXIT_OK


def _single(t, route) -> RouteTable:
    rt = RouteTable.empty_for(t)
    if route.src != route.dst:
        rt.routes[(route.src, route.dst)] = route
    return rt


def cmd_diff(args: argparse.Namespace) -> int:
    a = export.load_route_table(args.before)
    b = export.load_route_table(args.after)
    diff = engine.diff_route_tables(a, b, b.snapshot_time)
    print("\n".join(export.diff_lines(diff)))
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    rt = export.load_route_table(args.routetable)
    try:
        lines = export.report_lines(rt, args.pair)
    except KeyError as exc:
        raise UsageError(exc.args[0]) from None
    print("\n".join(lines))
    return EXIT_OK


def cmd_replay(args: argparse.Namespace) -> int:
    hp = _hyperparams(args)
    t, snap = _load(args)
    events = load_events(args.events)
    state = engine.EngineState.initial(t, snap, args.solver, hp, warm_start=args.warm_start)
    result = engine.replay(state, events, args.batch_window)
    records = []
    for diff in result.diffs:
        print("\n".join(export.diff_lines(diff)))
        records.append(json.dumps(export.diff_record(diff)))
    if args.diff_log:
        args.diff_log.write_text("".join(r + "\n" for r in records))
    if not result.complete:
        print(f"replay aborted at event {result.failed_event}: {result.error}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_CONVERGENCE if result.state.routes.failures else EXIT_OK


COMMANDS = {
    "validate": cmd_validate,
    "solve": cmd_solve,
    "oracle": cmd_oracle,
    "diff": cmd_diff,
    "report": cmd_report,
    "replay": cmd_replay,
}


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"rlroute: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (TopologyError, TelemetryError, ValueError, OSError) as exc:
        print(f"rlroute: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
