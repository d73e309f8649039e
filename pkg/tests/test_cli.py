import csv
import json
import math
import shutil
import subprocess

import pytest

from expthresh.cli import BIG_L, main, parse_grid, parse_L
from expthresh.core import load_instance

A_JSON = {"n": 4, "k": 2, "r": 2, "edges": [[0, 1], [1, 2], [2, 3], [0, 3]]}


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def a_file(tmp_path):
    path = tmp_path / "a.json"
    path.write_text(json.dumps(A_JSON))
    return path


def test_parse_L():
    assert parse_L("2e") == pytest.approx(2 * math.e)
    assert parse_L("e") == pytest.approx(math.e)
    assert parse_L("big") == BIG_L
    assert parse_L("16") == 16.0
    assert parse_L("1e3") == 1000.0


def test_parse_grid():
    assert parse_grid("1e3:1e6") == [1000, 10000, 100000, 1000000]
    assert parse_grid("10,100") == [10, 100]
    assert len(parse_grid("1e3:1e9:13")) == 13


def test_instance_clique(capsys):
    code, out, _ = run(capsys, "instance", "--clique", "5", "3", "2", "--r", "2")
    assert code == 0
    inst = load_instance(out)
    assert (inst.n, inst.d, inst.k) == (10, 10, 3)


def test_instance_malformed(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"n": 4,\n  "k": 2,\n  "edges": [[0, 1]\n')
    code, _, err = run(capsys, "instance", "--edges", str(bad))
    assert code == 3
    assert "line" in err


def test_instance_round_trip(tmp_path, a_file, capsys):
    first = tmp_path / "first.json"
    second = tmp_path / "second.json"
    assert main(["instance", "--edges", str(a_file), "--out", str(first)]) == 0
    assert main(["instance", "--edges", str(first), "--out", str(second)]) == 0
    assert first.read_bytes() == second.read_bytes()


def test_check_exit_codes(capsys):
    code, out, _ = run(capsys, "check", "--clique", "5", "3", "2", "--r", "2", "--thm", "two", "--L", "2.0")
    assert code == 0
    doc = json.loads(out)
    assert doc["schema"] == "v1" and doc["result"]["verdict"] == "PASS"
    point = doc["result"]["points"][0]
    assert point["margin"] == pytest.approx(3 * math.log(2.0) - math.log(0.6 * 2 ** (5 / 3) * 10 ** (1 / 3)))
    code, _, _ = run(capsys, "check", "--clique", "5", "3", "2", "--r", "2", "--thm", "two", "--L", "1.5")
    assert code == 1


def test_check_vacuous_s1(a_file, capsys):
    code, out, _ = run(capsys, "check", "--instance", str(a_file), "--thm", "one", "--s", "1")
    assert code == 0
    assert json.loads(out)["result"]["verdict"] == "PASS"


def test_check_inconclusive(capsys):
    code, out, _ = run(
        capsys, "check", "--clique", "5", "3", "2", "--r", "2", "--thm", "two",
        "--law", "empirical", "--trials", "100", "--L", "1.601",
    )
    assert code == 2
    assert json.loads(out)["result"]["verdict"] == "INCONCLUSIVE"


def test_check_reports_explicit_cover(a_file, capsys):
    code, out, _ = run(capsys, "check", "--instance", str(a_file), "--thm", "two", "--mode", "exact")
    doc = json.loads(out)["result"]
    assert code == 0
    assert doc["explicit_cover"]["w0_ok"] and doc["explicit_cover"]["exact"]


def test_check_missing_r_is_error(capsys):
    code, _, err = run(capsys, "check", "--clique", "5", "3", "2", "--thm", "two")
    assert code == 3 and "--r" in err


def test_usage_error_exit_code(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["check", "--thm", "three"])
    assert exc.value.code == 3


def test_cover_defaults_and_determinism(tmp_path, a_file, capsys):
    args = ["cover", "--instance", str(a_file), "--trials", "2000", "--seed", "5"]
    trace = tmp_path / "trace.jsonl"
    code, first, _ = run(capsys, *args, "--trace-out", str(trace))
    first_trace = trace.read_bytes()
    _, second, _ = run(capsys, *args, "--trace-out", str(trace))
    assert code == 0 and first == second
    assert trace.read_bytes() == first_trace
    doc = json.loads(first)
    res = doc["result"]
    assert doc["config"]["seed"] == 5
    assert res["resolved"]["s"] == 1 and res["resolved"]["t"] == 8
    assert not res["analytic_only"]
    assert "analytic_bound" in res["coverage"] and "estimate" in res["expected_weight"]
    lines = trace.read_text().splitlines()
    assert len(lines) == 8
    assert all(json.loads(line)["size"] == 2 for line in lines)


def test_cover_analytic_only(a_file, capsys):
    code, out, _ = run(capsys, "cover", "--instance", str(a_file), "--t", str(10**7), "--trials", "10")
    res = json.loads(out)["result"]
    assert code == 0 and res["analytic_only"]
    assert res["coverage"]["materialized"] is False


def test_s1_command(a_file, capsys):
    code, out, _ = run(capsys, "s1", "--instance", str(a_file))
    assert code == 0
    assert json.loads(out)["result"]["verdict"] == "PASS"


def test_pairs_and_chain(capsys):
    _, out, _ = run(capsys, "pairs", "--clique", "5", "3", "2")
    assert json.loads(out)["result"]["probs"] == {"0": "3/10", "1": "3/5", "3": "1/10"}
    _, out, _ = run(capsys, "pairs", "--clique", "5", "3", "2", "--materialize", "--r", "1")
    assert json.loads(out)["result"]["probs"] == {"0": "3/10", "1": "3/5", "3": "1/10"}
    _, out, _ = run(capsys, "chain", "--clique", "5", "3", "2", "--s", "2")
    steps = json.loads(out)["result"]["steps"]
    assert steps[1]["vertex_overlap"] == {"1": "3/10", "2": "3/5", "3": "1/10"}


def test_regimes_outputs(tmp_path, capsys):
    table = tmp_path / "scan.csv"
    plot = tmp_path / "plot.json"
    code, out, _ = run(
        capsys, "regimes", "--n-grid", "1e3:1e6", "--kt", "3", "--l", "2", "--L", "1.01",
        "--csv", str(table), "--emit-plot-data", str(plot),
    )
    assert code == 0
    summary = json.loads(out)["result"]
    assert summary["status"] == "gaps"
    rows = list(csv.DictReader(table.open()))
    assert set(rows[0]) == {"nt", "r", "lemma52_case1", "lemma52_case2", "lemma53", "covered"}
    assert any(row["covered"] == "0" for row in rows)
    series = json.loads(plot.read_text())["series"]
    assert series and len(series[0]["log_r"]) == len(series[0]["margin_upper"])


def test_regimes_big_L(capsys):
    code, out, _ = run(capsys, "regimes", "--n-grid", "1e3:1e6", "--kt", "3", "--l", "2", "--L", "big")
    summary = json.loads(out)["result"]
    assert code == 0
    assert summary["status"] == "vacuous"
    assert summary["min_gap_free_nt"] == 1000
    assert all(entry["regimes_meet"] for entry in summary["per_nt"])


def test_console_script(a_file):
    exe = shutil.which("expthresh")
    if exe is None:
        pytest.skip("console script not installed")
    proc = subprocess.run([exe, "check", "--instance", str(a_file), "--thm", "two"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["command"] == "check"
