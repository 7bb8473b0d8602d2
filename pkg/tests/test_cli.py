import io
import json
import subprocess
import sys

import pytest

from radiogather.cli import _parse_range, _parse_seeds, main
from radiogather.netgraph import gen_lower_bound, load_graph


@pytest.fixture
def g22(tmp_path):
    path = tmp_path / "g22.json"
    path.write_text(gen_lower_bound(2, 2).to_json())
    return str(path)


def test_gen_lower_bound(capsys):
    assert main(["gen", "--kind", "lower-bound", "--D", "3", "--p", "2"]) == 0
    inst = load_graph(capsys.readouterr().out)
    assert inst.graph.node_count == 5 and inst.k == 2


def test_gen_random_to_file(tmp_path):
    out = tmp_path / "r.json"
    assert main(["gen", "--n", "30", "--extra", "4", "--k", "6", "--seed", "9", "--out", str(out)]) == 0
    inst = load_graph(out.read_text())
    assert inst.graph.node_count == 30 and len(inst.graph.edges) == 33 and inst.k == 6


def test_labels(g22, capsys):
    assert main(["labels", g22]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["mode"] == "small" and len(data["labels"]) == 4
    assert data["labels"][0]["bit_length"] == 0
    assert main(["labels", g22, "--mode", "large"]) == 0
    assert json.loads(capsys.readouterr().out)["mode"] == "large"


def test_labels_multi_pairs(g22, capsys):
    assert main(["labels", g22, "--algo", "kbroadcast-multi"]) == 0
    rows = json.loads(capsys.readouterr().out)["labels"]
    assert set(rows[1]) == {"node", "gather", "broadcast"}


def test_run_json_and_csv(g22, capsys):
    assert main(["run", g22]) == 0
    out = capsys.readouterr()
    assert json.loads(out.out)["status"] == "quiescent"
    assert "completion_round=3 bound=4" in out.err
    assert main(["run", g22, "--format", "csv"]) == 0
    assert capsys.readouterr().out.startswith("round,node,action,received_ids,known_ids_count")


def test_run_limit_exit_one(g22, capsys):
    assert main(["run", g22, "--limit", "2"]) == 1
    assert "status=limit" in capsys.readouterr().err


def test_run_from_stdin(monkeypatch, capsys):
    monkeypatch.setattr(sys, "stdin", io.StringIO(gen_lower_bound(3, 2).to_json()))
    assert main(["run", "-", "--algo", "gather-ddelta"]) == 0
    assert "gather-ddelta" in capsys.readouterr().err


def test_invalid_instance_exit_two(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"n": 3, "edges": [[0, 1]], "sources": [1], "sink": 0}))
    assert main(["run", str(bad)]) == 2
    assert "error" in capsys.readouterr().err
    assert main(["run", str(tmp_path / "missing.json")]) == 2


def test_bad_flags_exit_two(capsys):
    assert main(["run"]) == 2
    assert main(["frobnicate"]) == 2
    assert main(["run", "x.json", "--algo", "nope"]) == 2


def test_sweep_lower_bound(capsys):
    assert main(["sweep", "--generator", "lower-bound", "--D-range", "2-4", "--k-range", "1-3"]) == 0
    out = capsys.readouterr()
    assert len(out.out.strip().splitlines()) == 1 + 9
    assert "9 rows, 0 bound violations" in out.err


def test_sweep_writes_out(tmp_path, capsys):
    out = tmp_path / "rows.csv"
    assert main(["sweep", "--n", "40", "--k", "5", "--seed", "0:5", "--out", str(out)]) == 0
    assert len(out.read_text().strip().splitlines()) == 6
    assert capsys.readouterr().out == ""


def test_sweep_violation_and_config_error(capsys):
    with pytest.warns(UserWarning, match="below D"):
        assert main(["sweep", "--generator", "lower-bound", "--D-range", "3", "--k-range", "3", "--limit", "2"]) == 1
    assert main(["sweep", "--seed", "5:5"]) == 2
    assert "seed range is empty" in capsys.readouterr().err


def test_verify_quick(tmp_path):
    out = tmp_path / "report.txt"
    assert main(["verify", "--quick", "--out", str(out)]) == 0
    text = out.read_text()
    assert "FAIL" not in text and "PASS  label bits fit" in text


def test_oracle(g22, capsys):
    assert main(["oracle", g22]) == 0
    assert json.loads(capsys.readouterr().out) == {"optimal_rounds": 3, "horizon": 4}
    assert main(["oracle", g22, "--limit", "2"]) == 0
    assert json.loads(capsys.readouterr().out)["optimal_rounds"] is None


def test_oracle_guard(tmp_path, capsys):
    path = tmp_path / "big.json"
    assert main(["gen", "--n", "20", "--k", "3", "--out", str(path)]) == 0
    assert main(["oracle", str(path)]) == 2


def test_parsers():
    assert _parse_seeds("3") == [3] and _parse_seeds("0:3") == [0, 1, 2] and _parse_seeds("1,4") == [1, 4]
    assert _parse_range("2-4") == [2, 3, 4] and _parse_range("5") == [5]


def test_module_entry_point(g22):
    proc = subprocess.run([sys.executable, "-m", "radiogather", "run", g22], capture_output=True, text=True)
    assert proc.returncode == 0 and "completion_round=3" in proc.stderr
