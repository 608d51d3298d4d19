import csv
import json

import numpy as np
import pytest

from gmn import _ipm, cli, io
from gmn.states import DensityMatrix, ghz_state, product_zero_state
from gmn.witness import cluster_witness

W_ORIGINAL = 0.4428090415


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def make(capsys, tmp_path, name, *args):
    path = tmp_path / f"{name}.json"
    code, _, _ = run(capsys, "make-state", *args, "--out", path)
    assert code == 0
    return path


def report(out):
    return json.loads(out)


def test_compute_ghz(capsys, tmp_path):
    path = make(capsys, tmp_path, "ghz", "ghz")
    code, out, _ = run(capsys, "compute", "--state", path, "--norm", "renormalized")
    assert code == 0
    rep = report(out)
    assert rep["value"] == pytest.approx(0.5, abs=1e-12)
    assert rep["method"] == "analytic-ghz"
    assert rep["defaults"]["tolerance"] == 1e-8


def test_compute_w_original(capsys, tmp_path):
    path = make(capsys, tmp_path, "w", "w")
    code, out, _ = run(capsys, "compute", "--state", path, "--norm", "original")
    assert code == 0
    rep = report(out)
    assert rep["method"] == "sdp"
    assert rep["value"] == pytest.approx(W_ORIGINAL, abs=1e-6)


def test_repeated_method_is_usage_error(capsys, tmp_path):
    path = make(capsys, tmp_path, "w", "w")
    code, _, err = run(capsys, "compute", "--state", path, "--method", "sdp", "--method", "analytic")
    assert code == 2 and "more than once" in err


def test_analytic_on_generic_state_is_usage_error(capsys, tmp_path):
    path = make(capsys, tmp_path, "w", "w")
    code, _, err = run(capsys, "compute", "--state", path, "--method", "analytic")
    assert code == 2 and "--method sdp" in err


def test_parse_error_exit_code(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"n_parties": 2}')
    assert run(capsys, "compute", "--state", bad)[0] == 2
    assert run(capsys, "compute", "--state", tmp_path / "missing.json")[0] == 2
    assert run(capsys, "bogus")[0] == 2


def test_size_cap_exit_code(capsys, tmp_path, monkeypatch):
    monkeypatch.delenv("GMN_MAX_DIM", raising=False)
    path = tmp_path / "p5.json"
    io.save_state(io.StateFile.from_density(product_zero_state(5)), path)
    code, _, err = run(capsys, "compute", "--state", path)
    assert code == 4 and "GMN_MAX_DIM" in err


def test_numerical_failure_exit_code(capsys, tmp_path, monkeypatch):
    real = _ipm.solve

    def broken(*args, **kwargs):
        res = real(*args, **kwargs)
        res.status = "numerical_failure"
        return res

    monkeypatch.setattr(_ipm, "solve", broken)
    path = make(capsys, tmp_path, "w", "w")
    assert run(capsys, "compute", "--state", path)[0] == 3


def test_certificate_outputs_and_verify(capsys, tmp_path):
    state = make(capsys, tmp_path, "w", "w")
    wit = tmp_path / "wit.json"
    dec = tmp_path / "dec.json"
    trace = tmp_path / "trace.csv"
    code, out, _ = run(capsys, "compute", "--state", state, "--witness-out", wit,
                       "--decomposition-out", dec, "--trace", trace)
    assert code == 0
    value = report(out)["value"]
    assert json.loads(dec.read_text())["certified_value"] == pytest.approx(value, abs=1e-7)
    assert trace.read_text().startswith("iteration,")
    code, out, _ = run(capsys, "verify-witness", "--witness", wit, "--state", state)
    assert code == 0
    verdict = json.loads(out)
    assert verdict["decomposable"] and verdict["lower_bound"] == pytest.approx(value, abs=1e-7)


def test_verify_rejects_bad_witness(capsys, tmp_path):
    cert = io.witness_to_dict(cluster_witness("++++"))
    cert["dims"] = [2, 2, 2, 2]
    cert["partitions"][0]["Q"] = io.matrix_to_json(-np.eye(16))
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(cert))
    cl = make(capsys, tmp_path, "cl", "cluster")
    code, out, _ = run(capsys, "verify-witness", "--witness", path, "--state", cl)
    assert code == 1 and json.loads(out)["decomposable"] is False


def test_verify_ghz_witness_on_ghz(capsys, tmp_path):
    state = make(capsys, tmp_path, "ghz", "ghz")
    wit = tmp_path / "wit.json"
    run(capsys, "compute", "--state", state, "--witness-out", wit)
    code, out, _ = run(capsys, "verify-witness", "--witness", wit, "--state", state)
    assert code == 0 and json.loads(out)["lower_bound"] == pytest.approx(0.5)


def test_noise_threshold_cluster(capsys, tmp_path):
    path = make(capsys, tmp_path, "cl", "cluster")
    code, out, _ = run(capsys, "noise-threshold", "--state", path)
    assert code == 0
    assert json.loads(out)["threshold"] == pytest.approx(5 / 13, abs=1e-6)


@pytest.mark.parametrize("method", ["auto", "sdp"])
def test_noise_threshold_ghz(capsys, tmp_path, method):
    path = make(capsys, tmp_path, "ghz", "ghz")
    code, out, _ = run(capsys, "noise-threshold", "--state", path, "--method", method)
    res = json.loads(out)
    assert code == 0 and res["method"] == ("analytic" if method == "auto" else "sdp")
    assert res["threshold"] == pytest.approx(3 / 7, abs=1e-6)


def test_noise_threshold_separable(capsys, tmp_path):
    path = tmp_path / "p.json"
    io.save_state(io.StateFile.from_density(product_zero_state(3)), path)
    code, out, _ = run(capsys, "noise-threshold", "--state", path)
    assert code == 0 and json.loads(out)["verdict"] == "never entangled"


def test_scan_fig2_small_grid(capsys, tmp_path):
    out = tmp_path / "fig2.csv"
    assert run(capsys, "scan-fig2", "--grid", 11, "--out", out)[0] == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 66
    corner = {(float(r["p1"]), float(r["p2"])): r for r in rows}
    assert corner[(1.0, 0.0)]["region"] == "III" and float(corner[(1.0, 0.0)]["gmn"]) == 0.5
    assert corner[(0.0, 1.0)]["region"] == "I" and float(corner[(0.0, 1.0)]["gmn"]) == 0.5
    assert corner[(0.0, 0.0)]["region"] == "IV" and float(corner[(0.0, 0.0)]["gmn"]) == 0.0
    assert run(capsys, "scan-fig2", "--grid", 1)[0] == 2


def test_make_state_variants(capsys, tmp_path):
    star = make(capsys, tmp_path, "star", "graph", "--edges", "0-1,0-2,0-3", "--noise", "0.8")
    st = io.load_state(star)
    assert st.graph_diagonal.graph.sorted_edges() == [(0, 1), (0, 2), (0, 3)]
    assert st.graph_diagonal.fidelity("++++") == pytest.approx(0.8 + 0.2 / 16)
    assert run(capsys, "make-state", "graph")[0] == 2
    assert run(capsys, "make-state", "ghz", "--noise", "1.5")[0] == 2
    code, out, _ = run(capsys, "make-state", "w", "--n", "4")
    assert code == 0 and io.loads_state(out).dims == (2, 2, 2, 2)


def test_star_graph_goes_to_sdp(capsys, tmp_path):
    path = make(capsys, tmp_path, "star", "graph", "--edges", "0-1,0-2")
    code, out, _ = run(capsys, "compute", "--state", path)
    rep = report(out)
    # the 3-vertex star graph state is a GHZ state up to local unitaries
    assert code == 0 and rep["method"] == "sdp" and rep["value"] == pytest.approx(0.5, abs=1e-6)


def _agree(capsys, path, norm):
    a = report(run(capsys, "compute", "--state", path, "--method", "analytic", "--norm", norm)[1])
    s = report(run(capsys, "compute", "--state", path, "--method", "sdp", "--norm", norm)[1])
    assert abs(a["value"] - s["value"]) <= 1e-6


@pytest.mark.parametrize("norm", ["original", "renormalized"])
def test_analytic_and_sdp_agree_on_ghz_fixtures(capsys, tmp_path, norm):
    for p in ("0.2", "0.5", "0.9"):
        _agree(capsys, make(capsys, tmp_path, f"g{p}", "ghz", "--noise", p), norm)
    spec = io.StateFile.from_density(DensityMatrix(ghz_state(3).mat * 0.7 + np.eye(8) * 0.3 / 8, (2, 2, 2)))
    path = tmp_path / "mat.json"
    io.save_state(spec, path)
    _agree(capsys, path, norm)


@pytest.mark.slow
def test_analytic_and_sdp_agree_on_cluster_fixture(capsys, tmp_path):
    _agree(capsys, make(capsys, tmp_path, "cl", "cluster", "--noise", "0.7"), "renormalized")
