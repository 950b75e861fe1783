import csv
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from qconv import cli
from qconv import tensor as T


def run(argv, capsys, stdin=None, monkeypatch=None):
    if stdin is not None:
        monkeypatch.setattr(sys, "stdin", io.StringIO(stdin))
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_pipeline_d6_into_metrics():
    fam = subprocess.run([sys.executable, "-m", "qconv.cli", "family", "d6"], capture_output=True, text=True, check=True)
    res = subprocess.run([sys.executable, "-m", "qconv.cli", "metrics", "gate"], input=fam.stdout,
                         capture_output=True, text=True, check=True)
    g = json.loads(res.stdout)
    assert g["e_p"] == pytest.approx((208 + math.sqrt(3)) / 210, abs=1e-12)
    assert g["rounded"]["e_p"] == 0.998724


def test_no_construction_exit_code(capsys):
    code, out, err = run(["latin", "mols", "--d", "2"], capsys)
    assert code == 2 and out == ""
    assert json.loads(err)["error"] == "NO_CONSTRUCTION"


def test_io_failure_exit_code(capsys, tmp_path):
    code, _, err = run(["metrics", "gate", "--in", str(tmp_path / "missing.json")], capsys)
    assert code == 1 and json.loads(err)["error"] == "IO"


def test_malformed_json_is_domain_error(capsys, monkeypatch):
    code, _, err = run(["metrics", "gate"], capsys, stdin="{not json", monkeypatch=monkeypatch)
    assert code == 2 and "message" in json.loads(err)


def test_scatter_points_inside_bounds(capsys, tmp_path):
    path = tmp_path / "fig2" / "ep_gt.csv"
    code, _, err = run(["metrics", "scatter", "--d", "3", "--n", "200", "--seed", "4", "--out", str(path)], capsys)
    assert code == 0 and json.loads(err)["all_inside_bounds"]
    rows = list(csv.reader(open(path)))[1:]
    assert len(rows) == 200
    for e, g in rows:
        assert 0.75 - 1e-12 <= float(e) <= 1 + 1e-12
        assert 3 / 8 - 1e-12 <= float(g) <= 5 / 8 + 1e-12
    man = json.loads((path.parent / "manifest.json").read_text())
    assert man["command"][:3] == ["qconv", "metrics", "scatter"]
    assert man["outputs"] == [str(path)]


def test_scatter_is_deterministic(capsys, tmp_path):
    a, b = tmp_path / "a" / "x.csv", tmp_path / "b" / "x.csv"
    run(["metrics", "scatter", "--n", "20", "--seed", "9", "--out", str(a)], capsys)
    run(["metrics", "scatter", "--n", "20", "--seed", "9", "--out", str(b)], capsys)
    assert a.read_text() == b.read_text()


def test_coherify_and_tristochastic_round_trip(capsys, monkeypatch):
    code, out, _ = run(["coherify", "build", "--d", "3", "--bases", "mub"], capsys)
    assert code == 0
    code, out, _ = run(["metrics", "gate"], capsys, stdin=out, monkeypatch=monkeypatch)
    g = json.loads(out)
    assert g["e_p"] == pytest.approx(5 / 6, abs=1e-12) and g["g_t"] == pytest.approx(0.5, abs=1e-12)


def test_invariant_eval(capsys, monkeypatch):
    _, U, _ = run(["family", "p81"], capsys)
    code, out, _ = run(["invariant", "eval"], capsys, stdin=U, monkeypatch=monkeypatch)
    v = json.loads(out)
    assert (v["re"], v["im"], v["scaled_by_d"]) == (81.0, 0.0, 729.0)


def test_family_p16_verify(capsys):
    code, out, _ = run(["family", "p16", "--verify-circuit"], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["circuit_equals_matrix"] and rep["gates"] == 18 and rep["depth"] == 11


def test_family_u81_params_file(capsys, tmp_path, monkeypatch):
    p = tmp_path / "p.json"
    p.write_text(json.dumps({"alpha2": [0.3, 1.2], "alpha3": [2.0, 5.0]}))
    code, out, _ = run(["family", "u81", "--params", str(p)], capsys)
    assert code == 0
    _, g, _ = run(["metrics", "gate"], capsys, stdin=out, monkeypatch=monkeypatch)
    assert json.loads(g)["is_2unitary"]


def test_multi_on_cube64(capsys, monkeypatch):
    _, U, _ = run(["family", "cube64"], capsys)
    _, out, _ = run(["metrics", "multi", "--d", "4", "--m", "4"], capsys, stdin=U, monkeypatch=monkeypatch)
    assert json.loads(out)["multipartite_ep"] == pytest.approx(1, abs=1e-10)


def test_coherence_range(capsys, monkeypatch):
    _, U, _ = run(["family", "p81"], capsys)
    _, out, _ = run(["coherence", "range", "--budget", "0"], capsys, stdin=U, monkeypatch=monkeypatch)
    r = json.loads(out)
    assert r["lo_estimate"] == pytest.approx(1 / 81) and r["hi_estimate"] == 1


def test_search_run_writes_logs(capsys, tmp_path):
    out = tmp_path / "run"
    code, _, _ = run(["search", "run", "--d", "3", "--restarts", "2", "--seed", "3", "--out", str(out)], capsys)
    assert code == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["successes"] >= 1
    assert (out / "manifest.json").exists()
    assert len(list(out.glob("restart_*.json"))) == 2


def test_stats_compare(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    a.write_text(json.dumps(T.matrix_to_json(np.eye(9))))
    b.write_text(json.dumps(T.matrix_to_json(T.haar_unitary(9, 1))))
    h = tmp_path / "h.csv"
    code, out, _ = run(["stats", "compare", "--a", str(a), "--b", str(b), "--n", "500", "--hist", str(h)], capsys)
    res = json.loads(out)
    assert code == 0 and res["statistic"] > 0.5
    assert h.read_text().startswith("bin_lo,bin_hi,count_a,count_b")


def test_repro_table_a(capsys, tmp_path):
    code, out, _ = run(["repro", "tableA", "--out", str(tmp_path)], capsys)
    assert code == 0
    assert "PASS U81 S2 = 0.555556" in out
    assert (tmp_path / "tableA.csv").exists()


def test_repro_unknown(capsys):
    code, _, err = run(["repro", "fig9"], capsys)
    assert code == 2 and json.loads(err)["error"]
