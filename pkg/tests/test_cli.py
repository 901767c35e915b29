"""End-to-end CLI checks, all through subprocesses (real exit codes)."""

import json
import subprocess
import sys

import numpy as np
import pytest

from safecut.network import Dataset, Dense, Network, Relu, save_dataset, save_network
from safecut.verifier import replay_witness
from safecut.milp import load_query


def run_cli(args, cwd, stdin_text=None):
    return subprocess.run(
        [sys.executable, "-m", "safecut.cli", *[str(a) for a in args]],
        capture_output=True,
        text=True,
        input=stdin_text,
        cwd=str(cwd),
    )


@pytest.fixture(scope="session")
def workdir(tmp_path_factory):
    """One small trained pipeline shared by all CLI tests.

    y = relu(x0) + relu(x1); the property is "x0 clearly above 0.3" with a
    margin band removed, so the default logistic head separates it exactly.
    """
    d = tmp_path_factory.mktemp("cli")
    net = Network(
        layers=(
            Dense(weights=np.eye(2), bias=np.zeros(2)),
            Relu(dimension=2),
            Dense(weights=np.array([[1.0, 1.0]]), bias=np.zeros(1)),
        ),
        input_dim=2,
    )
    save_network(net, str(d / "net.json"))

    rng = np.random.default_rng(0)
    rows = []
    while len(rows) < 80:
        x = rng.uniform(-1.0, 1.0, 2)
        if abs(x[0] - 0.3) > 0.1:
            rows.append(x)
    X = np.array(rows)
    y = (X[:, 0] > 0.3).astype(np.int64)
    save_dataset(Dataset(inputs=X, labels=y), str(d / "data.csv"))

    r = run_cli(
        ["bounds", "net.json", "bounds.json", "--data", "data.csv",
         "--layer", 1, "--diffs"],
        d,
    )
    assert r.returncode == 0, r.stderr
    r = run_cli(
        ["train-characterizer", "net.json", "data.csv", "head.json",
         "--layer", 1, "--property-id", "x0-high"],
        d,
    )
    assert r.returncode == 0, r.stderr

    def query(name, rhs):
        (d / name).write_text(
            json.dumps(
                {
                    "cut_layer": 1,
                    "bounds": "bounds.json",
                    "characterizer": "head.json",
                    "risk": [{"coeffs": [1.0], "op": ">=", "rhs": rhs}],
                }
            )
        )

    query("query_safe.json", 2.5)    # beyond the envelope's reach
    query("query_unsafe.json", 1.2)  # reachable where the head says phi
    return d


def test_verify_safe_exit_zero_and_conditional_notice(workdir):
    r = run_cli(["verify", "net.json", "query_safe.json", "safe.json"], workdir)
    assert r.returncode == 0, r.stderr
    rep = json.loads((workdir / "safe.json").read_text())
    assert rep["status"] == "safe"
    assert rep["conditional"] is True
    assert rep["witness"] is None
    assert "wall_time" not in rep["stats"]
    assert "conditional" in r.stderr  # assume-guarantee notice on stderr


def test_verify_unsafe_exit_one_with_replayable_witness(workdir):
    r = run_cli(["verify", "net.json", "query_unsafe.json", "unsafe.json"], workdir)
    assert r.returncode == 1, r.stderr
    rep = json.loads((workdir / "unsafe.json").read_text())
    assert rep["status"] == "unsafe"
    w = np.array(rep["witness"], dtype=np.float64)
    from safecut.network import load_network

    net = load_network(str(workdir / "net.json"))
    q = load_query(str(workdir / "query_unsafe.json"))
    facts = replay_witness(net, q, w)
    assert facts["in_bounds"] and facts["characterizer"] == 1
    assert facts["risk_satisfied"]


def test_verify_report_is_bitwise_idempotent(workdir):
    run_cli(["verify", "net.json", "query_safe.json", "rep_a.json"], workdir)
    run_cli(["verify", "net.json", "query_safe.json", "rep_b.json"], workdir)
    a = (workdir / "rep_a.json").read_bytes()
    b = (workdir / "rep_b.json").read_bytes()
    assert a == b
    assert a.endswith(b"\n")


def test_verify_timing_flag_adds_wall_time(workdir):
    r = run_cli(
        ["verify", "net.json", "query_safe.json", "timed.json", "--timing"], workdir
    )
    assert r.returncode == 0
    rep = json.loads((workdir / "timed.json").read_text())
    assert "wall_time" in rep["stats"]


def test_verify_budget_unknown_exit_three(workdir, tmp_path):
    # fractional-only root relaxation: one straddling relu, phi excludes it
    net = Network(
        layers=(
            Dense(weights=np.eye(1), bias=np.zeros(1)),
            Relu(dimension=1),
            Dense(weights=np.eye(1), bias=np.zeros(1)),
        ),
        input_dim=1,
    )
    save_network(net, str(tmp_path / "n.json"))
    (tmp_path / "b.json").write_text(
        json.dumps(
            {"layer": 1, "lo": [-1.0], "hi": [2.0], "provenance": "static",
             "sample_count": 0}
        )
    )
    (tmp_path / "h.json").write_text(
        json.dumps(
            {
                "property_id": "p",
                "decision_rule": "logit_ge_zero",
                "achieved_accuracy": 1.0,
                "network": {
                    "input_dim": 1,
                    "layers": [
                        {"type": "dense", "weights": [[-1.0]], "bias": [-0.5]}
                    ],
                },
            }
        )
    )
    (tmp_path / "q.json").write_text(
        json.dumps(
            {
                "cut_layer": 1,
                "bounds": "b.json",
                "characterizer": "h.json",
                "risk": [
                    {"coeffs": [1.0], "op": "<=", "rhs": 0.25},
                    {"coeffs": [1.0], "op": ">=", "rhs": 0.25},
                ],
            }
        )
    )
    r = run_cli(
        ["verify", "n.json", "q.json", "out.json", "--max-nodes", 1], tmp_path
    )
    assert r.returncode == 3, r.stderr
    rep = json.loads((tmp_path / "out.json").read_text())
    assert rep["status"] == "unknown"


def test_missing_network_file_is_input_error(workdir):
    r = run_cli(["verify", "nope.json", "query_safe.json", "x.json"], workdir)
    assert r.returncode == 2
    assert "error" in r.stderr.lower()


def test_garbage_query_is_input_error(workdir, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    r = run_cli(["verify", "net.json", str(bad), "x.json"], workdir)
    assert r.returncode == 2


def test_static_without_box_is_usage_error(workdir):
    r = run_cli(
        ["bounds", "net.json", "x.json", "--static", "--layer", 1], workdir
    )
    assert r.returncode == 2


def test_static_bounds_give_unconditional_verdict(workdir, tmp_path):
    r = run_cli(
        ["bounds", "net.json", str(tmp_path / "sb.json"), "--static",
         "--box=-1,1", "--layer", 1],
        workdir,
    )
    assert r.returncode == 0, r.stderr
    q = tmp_path / "q.json"
    q.write_text(
        json.dumps(
            {
                "cut_layer": 1,
                "bounds": str(tmp_path / "sb.json"),
                "characterizer": str(workdir / "head.json"),
                "risk": [{"coeffs": [1.0], "op": ">=", "rhs": 2.5}],
            }
        )
    )
    r = run_cli(["verify", "net.json", str(q), str(tmp_path / "v.json")], workdir)
    assert r.returncode == 0, r.stderr
    rep = json.loads((tmp_path / "v.json").read_text())
    assert rep["conditional"] is False
    assert r.stderr.strip() == ""  # no assume-guarantee notice for static proofs


def test_monitor_ldjson_stream(workdir):
    stdin = "0.5,0.5\n0.0,0.0\n9.0,9.0\nbad,row\n0.1,0.2\n"
    r = run_cli(["monitor", "net.json", "bounds.json"], workdir, stdin_text=stdin)
    assert r.returncode == 0, r.stderr
    lines = [json.loads(l) for l in r.stdout.splitlines() if l.strip()]
    assert len(lines) == 5
    assert lines[0]["contained"] is True
    assert lines[2]["contained"] is False
    assert any(v["kind"] == "box" for v in lines[2]["violations"])
    assert "error" in lines[3]
    assert lines[4]["contained"] is True
    assert [l.get("sample_id") for l in lines] == ["0", "1", "2", "3", "4"]


def test_monitor_activation_rows(workdir):
    # rows are already cut-layer activations (the cut here is the identity,
    # but --activations must skip the forward entirely)
    r = run_cli(
        ["monitor", "net.json", "bounds.json", "--activations"],
        workdir,
        stdin_text="0.2,0.2\n5.0,5.0\n",
    )
    lines = [json.loads(l) for l in r.stdout.splitlines() if l.strip()]
    assert lines[0]["contained"] is True and lines[1]["contained"] is False


def test_monitor_tolerance_flag(workdir):
    r = run_cli(
        ["monitor", "net.json", "bounds.json", "--tolerance", "100"],
        workdir,
        stdin_text="9.0,9.0\n",
    )
    assert json.loads(r.stdout.splitlines()[0])["contained"] is True


def test_stats_reports_cells_and_guarantee(workdir):
    r = run_cli(
        ["stats", "net.json", "head.json", "data.csv", "--layer", 1,
         "--delta", "0.05"],
        workdir,
    )
    assert r.returncode == 0, r.stderr
    rep = json.loads(r.stdout)
    c = rep["counts"]
    assert c["n11"] + c["n10"] + c["n01"] + c["n00"] == 80
    assert rep["gamma"] == 0.0  # the head is exact on its training data
    assert rep["point_guarantee"] == 1.0
    assert rep["conservative_guarantee"] == pytest.approx(
        0.05 ** (1.0 / 80.0), abs=1e-9
    )
    assert rep["premise_checked"] is False


def test_stats_with_risk_premise(workdir, tmp_path):
    risk = tmp_path / "risk.json"
    risk.write_text(json.dumps({"risk": [{"coeffs": [1.0], "op": ">=", "rhs": 99.0}]}))
    r = run_cli(
        ["stats", "net.json", "head.json", "data.csv", "--layer", 1,
         "--risk", str(risk)],
        workdir,
    )
    assert r.returncode == 0, r.stderr
    assert json.loads(r.stdout)["premise_checked"] is True


def test_debug_lp_dump(workdir, tmp_path):
    dump = tmp_path / "root.lp"
    r = run_cli(
        ["--debug-lp-dump", str(dump), "verify", "net.json", "query_safe.json",
         str(tmp_path / "v.json")],
        workdir,
    )
    assert r.returncode == 0, r.stderr
    text = dump.read_text()
    assert "minimize" in text and "binaries" in text
