import csv
import io
import json

import pytest

from rlroute import export, fixtures
from rlroute.cli import EXIT_CONVERGENCE, EXIT_OK, EXIT_USAGE, EXIT_VERIFY, main
from rlroute.oracle import WeightedView, solve_all
from rlroute.routes import Route, RouteTable
from rlroute.topology import Topology

EIGHT = fixtures.path("eight_node")
EIGHT_NOMINAL = fixtures.path("eight_node", "telemetry_nominal.json")
EIGHT_DEGRADED = fixtures.path("eight_node", "telemetry_degraded.json")
TOKYO = fixtures.path("tokyo")
TOKYO_NOMINAL = fixtures.path("tokyo", "telemetry_nominal.json")


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_validate(capsys):
    code, out, _ = run(capsys, "validate", EIGHT)
    assert code == EXIT_OK
    assert "8 nodes, 9 links, 1 component(s)" in out


def test_validate_schema_error(capsys, tmp_path):
    bad = tmp_path / "t.json"
    bad.write_text(json.dumps({"nodes": [1, 2, 3], "links": [{"a": 3, "b": 3}]}))
    code, _, err = run(capsys, "validate", bad)
    assert code == EXIT_USAGE and "self-loop" in err


def test_validate_reports_components(capsys, tmp_path):
    p = tmp_path / "t.json"
    p.write_text(json.dumps({"nodes": [1, 2, 3, 4], "links": [{"a": 1, "b": 2}, {"a": 3, "b": 4}]}))
    code, out, _ = run(capsys, "validate", p)
    assert "2 component(s)" in out and "component 2 (2 nodes): 3 4" in out


def test_solve_oracle_matrix_row1(capsys):
    code, out, _ = run(capsys, "solve", EIGHT, EIGHT_NOMINAL, "--solver", "oracle",
                       "--format", "matrix-table")
    assert code == EXIT_OK
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["Source", "Path", *map(str, range(1, 9))]
    assert rows[1][2:] == ["-", "1-2", "1-4-3", "1-4", "1-2-5", "1-2-5-6", "1-4-8-7", "1-4-8"]
    assert len(rows) == 9 and all(len(r) == 10 for r in rows)
    assert all(rows[i][i + 1] == "-" for i in range(1, 9))


def test_solve_q_is_byte_identical(capsys, tmp_path):
    outs = []
    for i in range(2):
        target = tmp_path / f"out{i}.json"
        code, _, _ = run(capsys, "solve", EIGHT, EIGHT_NOMINAL, "--solver", "q", "--seed", 7,
                         "--format", "structured", "-o", target)
        assert code == EXIT_OK
        outs.append(target.read_bytes())
    assert outs[0] == outs[1]


def test_solve_missing_telemetry_writes_nothing(capsys, tmp_path):
    target = tmp_path / "out.csv"
    code, _, err = run(capsys, "solve", EIGHT, tmp_path / "missing.json", "-o", target)
    assert code == EXIT_USAGE and err
    assert not target.exists()


def test_solve_convergence_failure_exit_code(capsys):
    code, out, err = run(capsys, "solve", EIGHT, EIGHT_NOMINAL, "--episodes", 1,
                         "--epsilon-start", 0, "--epsilon-end", 0)
    assert code == EXIT_CONVERGENCE
    assert "no-convergence" in out and "no convergence" in err


def test_show_config(capsys, tmp_path):
    code, out, _ = run(capsys, "solve", "--show-config")
    assert code == EXIT_OK
    assert json.loads(out) == {
        "alpha": 0.1, "gamma": 1.0, "epsilon_start": 1.0, "epsilon_end": 0.05,
        "epsilon_decay": 0.999, "episodes": 10000, "max_steps_per_episode": None, "seed": 0,
    }
    cfg = tmp_path / "hp.json"
    cfg.write_text(json.dumps({"alpha": 0.3, "episodes": 50}))
    _, out, _ = run(capsys, "solve", "--show-config", "--config", cfg, "--seed", 4)
    assert json.loads(out)["alpha"] == 0.3 and json.loads(out)["seed"] == 4


def test_bad_hyperparameter_is_usage_error(capsys):
    code, _, err = run(capsys, "solve", EIGHT, EIGHT_NOMINAL, "--alpha", 2)
    assert code == EXIT_USAGE and "alpha" in err


def test_usage_errors_exit_1(capsys):
    assert run(capsys, "frobnicate")[0] == EXIT_USAGE
    assert run(capsys, "solve", EIGHT)[0] == EXIT_USAGE


def test_flat_csv(capsys):
    code, out, _ = run(capsys, "solve", TOKYO, TOKYO_NOMINAL, "--solver", "oracle",
                       "--format", "flat-csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 506
    row = next(r for r in rows if r["src"] == "1" and r["dst"] == "22")
    assert row["path"] == "1-6-7-22" and row["total_reward"] == "-123.55"


def test_oracle_single_pair(capsys):
    code, out, _ = run(capsys, "oracle", EIGHT, EIGHT_NOMINAL, "--src", 1, "--dst", 7)
    assert code == EXIT_OK and out.strip() == "1-4-8-7  -81.00"


def test_oracle_all(capsys):
    code, out, _ = run(capsys, "oracle", EIGHT, EIGHT_NOMINAL, "--all")
    assert code == EXIT_OK and len(out.strip().splitlines()) == 57


def test_oracle_verify(capsys, tmp_path):
    good = tmp_path / "good.json"
    run(capsys, "solve", EIGHT, EIGHT_NOMINAL, "--format", "structured", "-o", good)
    code, out, _ = run(capsys, "oracle", EIGHT, EIGHT_NOMINAL, "--verify", good)
    assert code == EXIT_OK and "0 failures" in out
    # primary table checked against degraded telemetry is no longer optimal
    code, out, _ = run(capsys, "oracle", EIGHT, EIGHT_DEGRADED, "--verify", good)
    assert code == EXIT_VERIFY and "FAIL 3->4" in out


def _tables(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run(capsys, "solve", EIGHT, EIGHT_NOMINAL, "--solver", "oracle", "--format", "structured", "-o", a)
    run(capsys, "solve", EIGHT, EIGHT_DEGRADED, "--solver", "oracle", "--format", "structured", "-o", b)
    return a, b


def test_diff(capsys, tmp_path):
    from reference_tables import EIGHT_CHANGED, EIGHT_ERRATA

    a, b = _tables(capsys, tmp_path)
    code, out, _ = run(capsys, "diff", a, b)
    lines = out.strip().splitlines()
    assert code == EXIT_OK
    assert lines[0].startswith("# t=0 changed=16 unchanged=40")
    pairs = {tuple(int(x) for x in l.split(":")[0].split("->")) for l in lines[1:]}
    assert pairs == EIGHT_CHANGED | EIGHT_ERRATA
    assert "3->4: 3-4 (-30.00) => 3-2-1-4 (-85.00)" in lines


def test_diff_identical(capsys, tmp_path):
    a, _ = _tables(capsys, tmp_path)
    code, out, _ = run(capsys, "diff", a, a)
    assert code == EXIT_OK and out.strip() == "# t=0 changed=0 unchanged=56 newly_unreachable=0"


def test_diff_different_topologies(capsys, tmp_path):
    a, _ = _tables(capsys, tmp_path)
    c = tmp_path / "c.json"
    run(capsys, "solve", TOKYO, TOKYO_NOMINAL, "--solver", "oracle", "--format", "structured", "-o", c)
    code, _, err = run(capsys, "diff", a, c)
    assert code == EXIT_USAGE and "different topologies" in err


def test_report(capsys, tmp_path):
    t = tmp_path / "tokyo.json"
    run(capsys, "solve", TOKYO, TOKYO_NOMINAL, "--format", "structured", "-o", t)
    code, out, _ = run(capsys, "report", t, "--pair", "1:22", "--pair", "5:5")
    assert code == EXIT_OK
    assert out.splitlines() == ["1-6-7-22  -123.55", "5  0.00"]
    code, _, err = run(capsys, "report", t, "--pair", "1:99")
    assert code == EXIT_USAGE and "506 valid pairs" in err


def test_replay(capsys, tmp_path):
    log = tmp_path / "diffs.jsonl"
    code, out, _ = run(capsys, "replay", EIGHT, EIGHT_NOMINAL,
                       fixtures.path("eight_node", "events.jsonl"), "--solver", "oracle",
                       "--diff-log", log)
    assert code == EXIT_OK
    assert "7->8: 7-8 (-50.00) => 7-6-5-2-1-4-8 (-141.00)" in out
    records = [json.loads(l) for l in log.read_text().splitlines()]
    assert [r["changed"] for r in records] == [8, 8]
    code, out, _ = run(capsys, "replay", EIGHT, EIGHT_NOMINAL,
                       fixtures.path("eight_node", "events.jsonl"), "--batch-window", 10)
    assert out.count("# t=") == 1


def test_replay_aborts_on_bad_event(capsys, tmp_path):
    ev = tmp_path / "ev.jsonl"
    ev.write_text('{"t": 1, "a": 1, "b": 8, "field": "ber", "value": 1e-4}\n')
    code, _, err = run(capsys, "replay", EIGHT, EIGHT_NOMINAL, ev, "--solver", "oracle")
    assert code == EXIT_USAGE and "aborted at event 0" in err


# --- export module ------------------------------------------------------------

def test_structured_round_trip(tokyo):
    rt = solve_all(WeightedView.from_telemetry(tokyo[0], tokyo[1]))
    rt.failures[(1, 2)] = "greedy walk revisits node 3"
    del rt.routes[(1, 2)]
    again = export.from_document(json.loads(export.dumps_structured(rt)))
    assert again == rt


def test_matrix_cells_for_unrouted_pairs():
    t = Topology.from_edges([(1, 2, 1.0)], nodes=[1, 2, 3])
    rt = RouteTable.empty_for(t)
    rt.routes[(1, 2)] = Route((1, 2), -6.0)
    rt.unreachable |= {(1, 3), (3, 1), (2, 3), (3, 2)}
    rt.failures[(2, 1)] = "loop"
    rows = list(csv.reader(io.StringIO(export.matrix_table(rt, "secondary"))))
    assert rows[1] == ["1", "secondary", "-", "1-2", "unreachable"]
    assert rows[2][2] == "no-convergence"
    assert sum(len(r) - 2 for r in rows[1:]) == 9


@pytest.mark.parametrize("value, text", [(-123.549999, "-123.55"), (-0.0, "0.00"), (5, "5.00")])
def test_reward_rendering(value, text):
    assert export.fmt_reward(value) == text


def test_render_rejects_unknown_format():
    with pytest.raises(ValueError):
        export.render(RouteTable((1,), ()), "xml")
