from __future__ import annotations

import csv
import io
import json
import math

import networkx as nx
import pytest

from qaoa_rounds.certify import check_grover_norm, check_soundness
from qaoa_rounds.cli import EXIT_LIMITS, EXIT_OK, EXIT_USAGE, EXIT_VIOLATION, main, parse_lambda_grid, parse_p_range
from qaoa_rounds.mixers import grover_commutator_norm
from qaoa_rounds.problems import format_graph, random_regular_graph


@pytest.fixture
def k3(tmp_path):
    p = tmp_path / "k3.txt"
    p.write_text("3 3\n0 1\n1 2\n0 2\n")
    return str(p)


@pytest.fixture
def search10(tmp_path):
    p = tmp_path / "s10.json"
    p.write_text(json.dumps({"n": 10, "marked": ["0000000000"]}))
    return str(p)


def _run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


# ---- stats ----

def test_stats_k3(capsys, k3):
    code, out, _ = _run(capsys, "stats", "--input", k3)
    assert code == EXIT_OK
    rep = json.loads(out)["reports"][0]
    assert rep["enumeration"]["c_max"] == 2
    assert rep["enumeration"]["c_avg"] == 1.5 and rep["enumeration"]["c_avg_exact"] == "3/2"
    assert rep["enumeration"]["sigma_c"] == pytest.approx(0.8660254, abs=1e-7)
    assert rep["agreement"] is True
    assert rep["commutator_norms"]["grover"]["value"] == pytest.approx(math.sqrt(0.75))


def test_stats_large_klocal_is_coefficient_only(capsys, tmp_path):
    n = 30
    terms = [{"alpha": 0.5, "qubits": [j, (j + 1) % n]} for j in range(n)]
    p = tmp_path / "big.json"
    p.write_text(json.dumps({"n": n, "constant": 7.5, "terms": terms}))
    code, out, _ = _run(capsys, "stats", "--input", str(p))
    assert code == EXIT_OK
    rep = json.loads(out)["reports"][0]
    assert rep["flags"] == ["coefficient-only"]
    assert rep["coefficient"]["sigma_c"] == pytest.approx(math.sqrt(n * 0.25))
    assert "enumeration" not in rep


def test_stats_malformed_graph_reports_line(capsys, tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text("3 2\n0 1\n1 x\n")
    code, _, err = _run(capsys, "stats", "--input", str(p))
    assert code == EXIT_USAGE
    assert "line 3" in err


def test_stats_search_and_weight_restriction(capsys, k3, search10):
    code, out, _ = _run(capsys, "stats", "--input", search10)
    rep = json.loads(out)["reports"][0]
    assert code == EXIT_OK and rep["agreement"] is True
    assert rep["coefficient"]["c_avg"] == pytest.approx(1 / 1024)
    code, out, _ = _run(capsys, "stats", "--input", k3, "--feasible-weight", "1")
    rep = json.loads(out)["reports"][0]
    assert rep["enumeration"]["feasible_size"] == 3 and rep["enumeration"]["c_avg"] == 2
    assert "error" in rep["commutator_norms"]["tf"]


def test_limit_exit_code(capsys, k3):
    code, _, err = _run(capsys, "stats", "--input", k3, "--enum-max", "99")
    assert code == EXIT_LIMITS and "limit" in err


# ---- bound ----

def test_bound_grover_search(capsys):
    code, out, _ = _run(capsys, "bound", "--formula", "grover-search,search-overlap", "--lambda", "1",
                        "--N", "1024", "--m", "1")
    assert code == EXIT_OK
    rows = {r["formula"]: r for r in json.loads(out)["results"]}
    assert rows["grover-search"]["p_lower"] == pytest.approx((math.sqrt(1023)) / (2 * math.pi), rel=1e-12)
    assert rows["search-overlap"]["p_lower"] == pytest.approx(5.0904, abs=1e-4)


def test_bound_grover_search_from_instance(capsys, search10):
    code, out, _ = _run(capsys, "bound", "--input", search10, "--formula", "grover-search", "--lambda", "0.999")
    assert code == EXIT_OK
    row = json.loads(out)["results"][0]
    assert row["p_lower"] == pytest.approx(5.0803, abs=1e-3)


def test_bound_maxcut_edges(capsys):
    code, out, _ = _run(capsys, "bound", "--formula", "maxcut-grover", "--lambda", "1", "--c-max", "100",
                        "--edges", "100")
    assert code == EXIT_OK
    assert json.loads(out)["results"][0]["p_lower"] == pytest.approx(0.79577, abs=1e-4)


def test_bound_tf_regular_graph_is_trivial(capsys, tmp_path):
    p = tmp_path / "r10.txt"
    p.write_text(format_graph(random_regular_graph(10, 3, seed=4)))
    code, out, _ = _run(capsys, "bound", "--input", str(p), "--formula", "tf-objective", "--lambda", "1")
    assert code == EXIT_OK
    doc = json.loads(out)
    row = doc["results"][0]
    assert row["trivial"] is True and row["p_lower"] < 1
    assert row["provenance"]["comm_norm"].startswith("numeric")


def test_bound_rows_fail_independently(capsys):
    code, out, _ = _run(capsys, "bound", "--formula", "grover-search,tf-search-dist3", "--lambda", "0.4",
                        "--N", "64", "--m", "1", "--n", "6")
    assert code == EXIT_OK
    rows = {r["formula"]: r for r in json.loads(out)["results"]}
    assert "error" in rows["tf-search-dist3"] and "p_lower" in rows["grover-search"]


def test_bound_all_rows_failing_is_usage_error(capsys):
    code, _, _ = _run(capsys, "bound", "--formula", "qaoa-round", "--lambda", "1")
    assert code == EXIT_USAGE


def test_bound_unknown_formula(capsys):
    code, _, err = _run(capsys, "bound", "--formula", "magic", "--lambda", "1")
    assert code == EXIT_USAGE and "unknown formula" in err


def test_bound_lambda_grid_csv(capsys):
    code, out, _ = _run(capsys, "bound", "--formula", "grover-search", "--lambda-grid", "0.5:1:6",
                        "--N", "256", "--m", "2")
    assert code == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 6
    assert [float(r["lambda"]) for r in rows] == pytest.approx([0.5, 0.6, 0.7, 0.8, 0.9, 1.0])
    vals = [float(r["p_lower"]) for r in rows]
    assert vals == sorted(vals)


def test_bound_tf_objective_uses_tf_norm(capsys, k3):
    code, out, _ = _run(capsys, "bound", "--input", k3, "--formula", "qaoa-round,tf-objective", "--lambda", "1")
    rows = {r["formula"]: r for r in json.loads(out)["results"]}
    assert rows["qaoa-round"]["denominator"] == pytest.approx(4 * math.pi * math.sqrt(0.75))
    assert rows["tf-objective"]["denominator"] != rows["qaoa-round"]["denominator"]


def test_bound_user_flags_marked(capsys, k3):
    code, out, _ = _run(capsys, "bound", "--input", k3, "--formula", "qaoa-round", "--lambda", "1",
                        "--comm-norm", "2.0")
    doc = json.loads(out)
    assert doc["results"][0]["denominator"] == pytest.approx(8 * math.pi)
    assert doc["provenance"]["comm_norm:grover"] == "user-supplied"


def test_bound_writes_file(capsys, tmp_path):
    out = tmp_path / "b.json"
    code, stdout, _ = _run(capsys, "bound", "--formula", "grover-search", "--lambda", "1", "--N", "4", "--m", "1",
                           "--out", str(out))
    assert code == EXIT_OK and stdout == ""
    assert json.loads(out.read_text())["schema"] == 1


# ---- simulate ----

def test_simulate_grover_p25(capsys, search10):
    code, out, _ = _run(capsys, "simulate", "--input", search10, "--p", "25", "--grover-fixed")
    assert code == EXIT_OK
    rec = json.loads(out.strip())
    assert rec["p"] == 25 and rec["result"]["success_probability"] >= 0.999


def test_simulate_range_and_p0(capsys, k3):
    code, out, _ = _run(capsys, "simulate", "--input", k3, "--p", "0:2", "--grover-fixed")
    recs = [json.loads(line) for line in out.splitlines()]
    assert code == EXIT_OK and [r["p"] for r in recs] == [0, 1, 2]
    assert recs[0]["result"]["lambda"] == pytest.approx(0.75)


def test_simulate_schedule_inline(capsys, k3):
    sched = json.dumps({"gammas": [0.3, 0.2], "betas": [0.1, 0.4]})
    code, out, _ = _run(capsys, "simulate", "--input", k3, "--mixer", "tf", "--schedule", sched)
    rec = json.loads(out)
    assert code == EXIT_OK and rec["p"] == 2 and len(rec["result"]["x_expectations"]) == 3


def test_simulate_tf_on_constrained_refused(capsys, k3):
    code, _, err = _run(capsys, "simulate", "--input", k3, "--mixer", "tf", "--feasible-weight", "1",
                        "--grover-fixed")
    assert code == EXIT_USAGE and "transverse-field" in err


def test_simulate_optimize_needs_seed(capsys, k3):
    code, _, err = _run(capsys, "simulate", "--input", k3, "--p", "1", "--optimize", "grid")
    assert code == EXIT_USAGE and "--seed" in err


def test_simulate_optimize_seeded(capsys, k3):
    argv = ["simulate", "--input", k3, "--p", "1", "--optimize", "coordinate", "--seed", "3", "--restarts", "1"]
    code, a, _ = _run(capsys, *argv)
    _, b, _ = _run(capsys, *argv)
    assert code == EXIT_OK and a == b
    assert json.loads(a)["optimizer"]["seed"] == 3


def test_simulate_optimizer_limit(capsys, k3):
    code, _, _ = _run(capsys, "simulate", "--input", k3, "--p", "3", "--optimize", "grid", "--seed", "0",
                      "--opt-max-p", "2")
    assert code == EXIT_LIMITS


# ---- certify ----

def test_certify_quick_is_reproducible(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    code, _, err = _run(capsys, "certify", "--quick", "--out", str(a))
    assert code == EXIT_OK
    assert err.count("PASS") == 10 and "FAIL" not in err
    _run(capsys, "certify", "--quick", "--out", str(b))
    assert a.read_bytes() == b.read_bytes()
    doc = json.loads(a.read_text())
    assert doc["passed"] is True and doc["config"]["seed"] == 0


def test_corrupted_norm_is_caught():
    res = check_grover_norm(seed=0, count=5, max_n=5, norm_fn=lambda c: 0.5 * grover_commutator_norm(c))
    assert not res.passed
    assert res.reproducer is not None and "spectrum" in res.reproducer
    assert res.line().startswith("FAIL")


def test_corrupted_sigma_breaks_soundness():
    res = check_soundness(seed=0, runs=100, sigma_fn=lambda c: 0.01 * grover_commutator_norm(c))
    assert not res.passed
    assert {"formula", "bound", "limit"} <= set(res.reproducer)
    assert res.reproducer["bound"] > res.reproducer["limit"]


# ---- parsing helpers ----

def test_parse_helpers():
    assert parse_lambda_grid("0:1:3") == [0.0, 0.5, 1.0]
    assert parse_p_range("2:4") == [2, 3, 4] and parse_p_range("5") == [5]
    for bad in ("0:1", "a:b:c"):
        with pytest.raises(Exception):
            parse_lambda_grid(bad)


def test_bad_arguments_exit_usage(capsys):
    assert main(["frobnicate"]) == EXIT_USAGE
    assert main(["bound", "--formula", "grover-search"]) == EXIT_USAGE
    capsys.readouterr()


def test_bipartite_graph_file_round_trip(capsys, tmp_path):
    g = nx.complete_bipartite_graph(4, 5)
    p = tmp_path / "kb.txt"
    p.write_text(f"9 {g.number_of_edges()}\n" + "".join(f"{u} {v}\n" for u, v in g.edges()))
    code, out, _ = _run(capsys, "bound", "--input", str(p), "--formula", "maxcut-grover", "--lambda", "1")
    assert code == EXIT_OK
    assert json.loads(out)["results"][0]["p_lower"] == pytest.approx(math.sqrt(20) / (4 * math.pi), rel=1e-12)




def test_certify_failure_exits_with_reproducer(capsys, monkeypatch):
    def corrupt(cfg):
        return [check_grover_norm(seed=0, count=5, max_n=5, norm_fn=lambda c: 0.5 * grover_commutator_norm(c))]

    monkeypatch.setattr("qaoa_rounds.cli.run_all", corrupt)
    code, out, err = _run(capsys, "certify", "--quick")
    assert code == EXIT_VIOLATION
    assert "FAIL grover-norm" in err and "reproducer" in err and '"spectrum"' in err
    assert json.loads(out)["passed"] is False
