import json

import numpy as np
import pytest

from ewkit import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_witness_reduction(capsys, tmp_path):
    out_path = tmp_path / "w.json"
    code, out, _ = run(capsys, "witness", "--family", "reduction", "--n", "3", "--out", str(out_path))
    rep = json.loads(out)
    assert code == 0
    assert rep["results"]["lambda_min"] == pytest.approx(-1 / 3, abs=1e-12)
    assert {c["name"] for c in rep["checks"]} >= {"hermitian", "unit_trace", "block_positive"}
    w = json.loads(out_path.read_text())
    assert w["rows"] == 9 and w["source"]["family"] == "reduction"


def test_witness_gen_robertson_polar(capsys, tmp_path):
    out_path = tmp_path / "w.json"
    code, out, _ = run(capsys, "witness", "--family", "gen-robertson", "--k", "2", "--z", "1,2:pi", "--out", str(out_path))
    assert code == 0
    w = json.loads(out_path.read_text())
    assert w["rows"] == 16 and w["cols"] == 16
    z = w["source"]["z"][0]
    assert z["re"] == pytest.approx(-1) and z["im"] == pytest.approx(0, abs=1e-15)


@pytest.mark.parametrize("argv", [
    ["witness", "--family", "reduction", "--n", "1"],
    ["witness", "--family", "gen-reduction", "--n", "3", "--z", "1,2:2"],
    ["witness", "--family", "gen-reduction", "--n", "3", "--z", "1,9:1"],
    ["witness", "--family", "gen-reduction", "--n", "3", "--z", "garbage"],
    ["witness", "--family", "nope", "--n", "3"],
    ["spa", "/does/not/exist.json"],
])
def test_usage_errors(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_spa_reduction(capsys, tmp_path):
    p = tmp_path / "w.json"
    run(capsys, "witness", "--family", "reduction", "--n", "3", "--out", str(p))
    code, out, _ = run(capsys, "spa", str(p))
    rep = json.loads(out)
    assert code == 0 and rep["results"]["p_star"] == pytest.approx(0.25, abs=1e-12)


def test_optimality_auto(capsys, tmp_path):
    p = tmp_path / "w.json"
    run(capsys, "witness", "--family", "gen-robertson", "--k", "2", "--z", "1,2:0.3pi", "--out", str(p))
    code, out, _ = run(capsys, "optimality", str(p), "--angles", "auto")
    rep = json.loads(out)
    assert code == 0 and rep["results"]["certified"] and rep["results"]["span_rank"] == 16
    code, _, _ = run(capsys, "optimality", str(p), "--angles", "zero")
    assert code == 3


def test_state_ppt_reports_discrepancy(capsys, tmp_path):
    p = tmp_path / "w.json"
    run(capsys, "witness", "--family", "gen-robertson", "--k", "2", "--z", "all:-1", "--out", str(p))
    code, out, _ = run(capsys, "state-ppt", "--k", "2", "--z", "all:-1", "--detect", str(p))
    rep = json.loads(out)
    assert code == 4
    assert rep["results"]["detection_value"] == pytest.approx(-1 / 48, abs=1e-10)
    assert all(c["passed"] for c in rep["checks"])
    d = rep["discrepancies"][0]
    assert d["reading"] == "literal" and d["failing_checks"][0] == "positivity"


def test_probe_and_certify(capsys):
    code, out, _ = run(capsys, "probe", "--family", "gen-robertson", "--k", "2", "--z", "1,2:0.3+0.4i", "--samples", "2000")
    assert code == 0 and json.loads(out)["results"]["min_found"] >= -1e-10
    code, out, _ = run(capsys, "certify-spa-separable", "--n", "3", "--z", "1,2:pi/3, 1,3:-1")
    rep = json.loads(out)
    assert code == 0 and rep["results"]["target_residual"] <= 1e-8


def test_phi6(capsys):
    code, out, _ = run(capsys, "phi6")
    rep = json.loads(out)
    assert code == 4 and rep["results"]["twirl"] == "block-torus"
    assert all(c["passed"] for c in rep["checks"])


def test_byte_stable_and_seed_env(capsys, monkeypatch, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run(capsys, "--report", str(a), "probe", "--family", "reduction", "--n", "3", "--samples", "500")
    run(capsys, "probe", "--family", "reduction", "--n", "3", "--samples", "500", "--report", str(b))
    assert a.read_bytes() == b.read_bytes()
    assert json.loads(a.read_text())["seed"] == 42
    monkeypatch.setenv("EWKIT_SEED", "7")
    _, out, _ = run(capsys, "probe", "--family", "reduction", "--n", "3", "--samples", "500")
    assert json.loads(out)["seed"] == 7
    _, out, _ = run(capsys, "--seed", "3", "probe", "--family", "reduction", "--n", "3", "--samples", "500")
    assert json.loads(out)["seed"] == 3


def test_summary_table(capsys):
    code, _, err = run(capsys, "witness", "--family", "reduction", "--n", "2", "--summary")
    assert code == 0 and "block_positive" in err and "PASS" in err


@pytest.mark.parametrize("text,value", [
    ("-1", -1), ("0.5+0.2i", 0.5 + 0.2j), ("pi", -1), ("pi/2", 1j), ("-pi/2", -1j), ("0.5pi", 1j),
])
def test_parse_value(text, value):
    assert cli.parse_value(text) == pytest.approx(value)


def test_parse_zspec():
    z = cli.parse_zspec("1,2:-1, 2,3:0.5i", 3)
    assert z.get(1, 2) == -1 and z.get(2, 3) == pytest.approx(0.5j) and z.get(1, 3) == 1
    z = cli.parse_zspec("2,1:0.5i", 2)
    assert z.get(1, 2) == pytest.approx(-0.5j)
    assert np.allclose(cli.parse_zspec("all:-1", 3).matrix(), -(np.ones((3, 3)) - np.eye(3)))
