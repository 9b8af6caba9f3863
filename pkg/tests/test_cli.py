import json

import numpy as np
import pytest

from edcausal.cli import main
from edcausal.dag import build_dag, save_dag
from edcausal.data import Dataset


@pytest.fixture
def specs(tmp_path):
    main(["catalog", "--export-dir", str(tmp_path / "specs")])
    return tmp_path / "specs"


def _dag_file(tmp_path, name, edges):
    path = tmp_path / f"{name}.json"
    nodes = sorted({v for e in edges for v in e})
    save_dag(build_dag(nodes, edges), path)
    return str(path)


def test_dsep_exit_codes(tmp_path, capsys):
    chain = _dag_file(tmp_path, "chain", [("A", "B"), ("B", "C")])
    collider = _dag_file(tmp_path, "collider", [("A", "B"), ("C", "B")])
    assert main(["dsep", chain, "A", "C", "--given", "B"]) == 0
    assert capsys.readouterr().out.strip() == "d-separated"
    assert main(["dsep", collider, "A", "C", "--given", "B"]) == 1
    out = capsys.readouterr().out
    assert out.startswith("d-connected") and "A -> B <- C" in out
    assert main(["dsep", str(tmp_path / "missing.json"), "A", "C"]) == 2
    assert main(["dsep", chain, "A", "C", "--given", "A"]) == 2


def test_graph_commands(tmp_path, capsys):
    g = _dag_file(tmp_path, "fig3", [("Z", "X"), ("Z", "Y"), ("X", "Y")])
    assert main(["paths", g, "X", "Y", "--backdoor"]) == 0
    assert capsys.readouterr().out.split("\t")[0] == "X <- Z -> Y"
    assert main(["adjust-check", g, "X", "Y", "--z", "Z"]) == 0
    assert main(["adjust-check", g, "X", "Y"]) == 1
    assert "open backdoor: X <- Z -> Y" in capsys.readouterr().out
    assert main(["intervene", g, "--targets", "X"]) == 0
    assert json.loads(capsys.readouterr().out)["edges"] == [["X", "Y"], ["Z", "Y"]]
    assert main(["export-dot", g, "--backdoor", "X", "Y"]) == 0
    assert 'label="backdoor"' in capsys.readouterr().out


def test_simulate_byte_identical(specs, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (a, b):
        assert main(["simulate", str(specs / "single-posttest.json"), "--n", "500", "--seed", "7", "--out", str(out)]) == 0
    assert a.read_bytes() == b.read_bytes()
    lines = a.read_text().splitlines()
    assert lines[0] == "U1,U2,W1,X,O1" and len(lines) == 501


def test_simulate_usage_errors(specs):
    with pytest.raises(SystemExit) as info:
        main(["simulate", str(specs / "single-posttest.json"), "--n", "0", "--seed", "1"])
    assert info.value.code == 2
    with pytest.raises(SystemExit):
        main(["simulate", str(specs / "single-posttest.json"), "--n", "5"])  # no seed


def test_simulate_rejects_bad_model(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({
        "dag": {"nodes": [{"id": "A", "role": "generic"}, {"id": "B", "role": "generic"}], "edges": [["A", "B"]]},
        "equations": {"A": {"kind": "bernoulli", "intercept": 0.5, "coefficients": {}},
                      "B": {"kind": "bernoulli", "intercept": 0.5, "coefficients": {"A": 0.7}}},
    }))
    assert main(["simulate", str(path), "--n", "5", "--seed", "1"]) == 2
    assert "B" in capsys.readouterr().err


def test_gformula_matches_standardize(tmp_path, capsys):
    rng = np.random.default_rng(0)
    n = 400
    l = rng.integers(0, 2, n)
    x = (rng.random(n) < 0.3 + 0.4 * l).astype(int)
    y = 1 + 2 * x + 3 * l + rng.normal(size=n)
    path = tmp_path / "d.csv"
    Dataset({"L": l, "X": x, "Y": y}).to_csv(path)
    main(["estimate", str(path), "--method", "standardize", "--treatment", "X", "--outcome", "Y", "--adjust", "L",
          "--format", "json"])
    s = json.loads(capsys.readouterr().out)
    main(["estimate", str(path), "--method", "g-formula", "--treatments", "X", "--confounders", "L", "--outcome",
          "Y", "--format", "json"])
    g = json.loads(capsys.readouterr().out)
    assert g["regime_means"]["X=1"] == pytest.approx(s["regime_means"]["X=1"], abs=1e-12)
    assert g["regime_means"]["X=0"] == pytest.approx(s["regime_means"]["X=0"], abs=1e-12)


def test_estimate_ols_and_rd(tmp_path, capsys):
    a = np.linspace(-1, 1, 41)
    y = 1 + 0.5 * a + 2 * (a >= 0) + 0.3 * a * (a >= 0)
    path = tmp_path / "rd.csv"
    Dataset({"A": a, "O": y}).to_csv(path)
    with pytest.raises(SystemExit) as info:
        main(["estimate", str(path), "--method", "rd", "--running", "A", "--outcome", "O", "--bandwidth", "1"])
    assert info.value.code == 2
    assert main(["estimate", str(path), "--method", "rd", "--running", "A", "--outcome", "O", "--cutoff", "0",
                 "--bandwidth", "2", "--format", "json"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert [t["name"] for t in rep["terms"]] == ["beta0", "beta1", "beta2", "beta3"]
    assert rep["terms"][2]["estimate"] == pytest.approx(2, abs=1e-9)
    assert main(["estimate", str(path), "--method", "ols", "--outcome", "O", "--terms", "A", "--B", "100",
                 "--seed", "1"]) == 0
    assert "ci_low" in capsys.readouterr().out
    assert main(["estimate", str(path), "--method", "ols", "--outcome", "O", "--terms", "Q"]) == 2


def test_estimate_iptw_writes_weights(specs, tmp_path, capsys):
    data = tmp_path / "fb.csv"
    main(["simulate", str(specs / "tv-feedback.json"), "--n", "3000", "--seed", "1", "--out", str(data)])
    weights = tmp_path / "w.csv"
    assert main(["estimate", str(data), "--method", "iptw-msm", "--treatments", "X1,X2,X3", "--confounders",
                 ";L2;L3", "--outcome", "O", "--numerator", "marginal", "--weights-out", str(weights)]) == 0
    assert weights.read_text().splitlines()[0] == "unit,W,SW"
    assert "X1*X2*X3" in capsys.readouterr().out


def test_reproduce_commands(capsys):
    assert main(["reproduce", "bogus-id", "--seed", "1"]) == 2
    code = main(["reproduce", "single-posttest", "--seed", "1", "--n", "20000", "--B", "0"])
    out = capsys.readouterr().out
    assert code == 0
    assert [line.split()[0] for line in out.splitlines()[3:] if line.split()[1] == "X"] == [
        "ols-none", "ols-w1", "ols-w1-u1", "ols-w1-u1-u2"]
    first = main(["reproduce", "tv-no-unmeasured", "--seed", "2", "--n", "300", "--B", "100", "--format", "json"])
    a = capsys.readouterr().out
    second = main(["reproduce", "tv-no-unmeasured", "--seed", "2", "--n", "300", "--B", "100", "--format", "json"])
    assert a == capsys.readouterr().out and first == second


def test_catalog_json(capsys):
    assert main(["catalog", "--format", "json"]) == 0
    ids = [s["id"] for s in json.loads(capsys.readouterr().out)]
    assert "tv-feedback" in ids
