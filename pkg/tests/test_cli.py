import json

import numpy as np
import pytest

from dipmsc import cli
from dipmsc.cli import ClusterParams, compute_metrics, main, run_clustering
from dipmsc.distance import shift
from dipmsc.driver import DipmConfig, dipm_sc
from dipmsc.errors import ConvergenceError
from dipmsc.io import load_tensor, save_tensor
from dipmsc.report import ClusteringReport
from dipmsc.tensor import SeriesTensor, smooth_tensor


def _run(argv, capsys):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def dataset(tmp_path, capsys):
    path = tmp_path / "d.csv"
    code, _, _ = _run(["generate", "--output", path, "--seed", 1], capsys)
    assert code == 0
    return path


def _periodic_pair(tmp_path):
    # cluster A spikes every 4 steps, cluster B every 6; member totals 4, 8, 12 in both
    T = 24
    a = np.zeros(T)
    a[::4] = 1.0 / 6
    b = np.zeros(T)
    b[1::6] = 1.0 / 4
    rows = [s * np.stack([a, a]) for s in (4, 8, 12)] + [s * np.stack([b, b]) for s in (4, 8, 12)]
    X = SeriesTensor(np.stack(rows), tuple(f"h{i}" for i in range(6)), ("pop", "pos"))
    path = tmp_path / "p.json"
    save_tensor(X, path)
    return path


def test_generate_then_fixed_k_scores(dataset, tmp_path, capsys):
    rep = tmp_path / "r.json"
    code, _, _ = _run(["cluster", "--input", dataset, "--mode", "fixed-k", "--k", 3, "--q-max", 4,
                       "--smooth-window", 0, "--output", rep], capsys)
    assert code == 0
    code, out, _ = _run(["score", "--report", rep, "--truth", str(dataset) + ".truth.json"], capsys)
    assert code == 0 and json.loads(out)["ari"] >= 0.9


def test_noiseless_generate_has_zero_objective(tmp_path, capsys):
    path = tmp_path / "z.json"
    assert _run(["generate", "--output", path, "--noise", 0, "--shift-jitter", 0], capsys)[0] == 0
    code, out, _ = _run(["cluster", "--input", path, "--mode", "fixed-k", "--k", 3], capsys)
    assert code == 0
    assert json.loads(out)["objective"] <= 1e-12


def test_invalid_spec_exits_1(tmp_path, capsys):
    code, _, err = _run(["generate", "--output", tmp_path / "x.csv", "--k-true", 9], capsys)
    assert code == 1
    doc = json.loads(err)
    assert doc["error"] == "SpecError" and doc["exit_code"] == 1


def test_missing_k_names_flag(dataset, capsys):
    code, out, err = _run(["cluster", "--input", dataset, "--mode", "fixed-k"], capsys)
    assert code == 1 and out == ""
    assert "--k" in json.loads(err)["message"]


def test_bad_flags_exit_1(dataset, capsys):
    assert _run(["cluster", "--input", dataset, "--mode", "nope"], capsys)[0] == 1
    assert _run(["cluster"], capsys)[0] == 1
    assert _run(["cluster", "--input", dataset, "--smooth-window", 99], capsys)[0] == 1
    assert _run(["cluster", "--input", "/does/not/exist.csv"], capsys)[0] == 1


def test_k_one_report(dataset, capsys):
    code, out, _ = _run(["cluster", "--input", dataset, "--mode", "fixed-k", "--k", 1], capsys)
    rep = ClusteringReport.from_json(out)
    assert code == 0 and rep.K_final == 1 and rep.schema == 1
    assert sorted(rep.clusters[0].members) == sorted(load_tensor(dataset).entity_ids)


def test_report_round_trip_and_partition(dataset, capsys):
    code, out, _ = _run(["cluster", "--input", dataset, "--q-max", 4, "--smooth-window", 0,
                         "--bootstrap", 200], capsys)
    rep = ClusteringReport.from_json(out)
    assert ClusteringReport.from_json(rep.to_json()) == rep
    assert rep.to_json() == out
    members = [e for c in rep.clusters for e in c.members]
    assert sorted(members) == sorted(rep.entities) and len(members) == len(set(members))
    assert "timing" not in json.loads(out)
    for c in rep.clusters:
        assert len(c.q) == len(c.members) == len(c.alpha) == len(c.popularity)
        assert np.allclose(np.linalg.norm(np.array(c.centroid), axis=1), 1.0)


def test_timing_is_opt_in(dataset, capsys):
    _, out, _ = _run(["cluster", "--input", dataset, "--mode", "fixed-k", "--k", 2, "--timing"], capsys)
    assert json.loads(out)["timing"]["cluster_seconds"] >= 0


def test_cli_equals_library(dataset, capsys):
    code, out, _ = _run(["cluster", "--input", dataset, "--q-max", 4, "--smooth-window", 6,
                         "--bootstrap", 300, "--seed", 7, "--threads", 2], capsys)
    rep = ClusteringReport.from_json(out)
    X = load_tensor(dataset)
    direct = dipm_sc(smooth_tensor(X, 6), DipmConfig(q_max=4, b=300, seed=7))
    assert rep.K_final == direct.K
    assert np.array_equal(np.array([c.centroid for c in rep.clusters]), direct.clustering.centroids)
    assert rep.labels(X.entity_ids) == direct.clustering.assignment.cluster_of.tolist()
    assert rep.objective == direct.clustering.objective
    lib, _, _ = run_clustering(X, ClusterParams(q_max=4, smooth_window=6, bootstrap=300, seed=7))
    assert lib.to_json() == out


def test_byte_identical_runs(dataset, tmp_path, capsys):
    args = ["cluster", "--input", dataset, "--q-max", 4, "--smooth-window", 4, "--bootstrap", 200]
    outs = []
    for i in range(2):
        p = tmp_path / f"r{i}.json"
        assert _run(args + ["--output", p, "--threads", i + 1], capsys)[0] == 0
        outs.append(p.read_bytes())
    assert outs[0] == outs[1]


def test_plots(dataset, tmp_path, capsys):
    plots = tmp_path / "plots"
    code, out, _ = _run(["cluster", "--input", dataset, "--mode", "fixed-k", "--k", 3, "--q-max", 4,
                         "--smooth-window", 0, "--plots-dir", plots], capsys)
    rep = ClusteringReport.from_json(out)
    X = load_tensor(dataset)
    for c in rep.clusters:
        for d in range(2):
            cent = (plots / f"cluster_{c.cluster}_dim_{d}_centroid.csv").read_text().splitlines()
            assert cent[0] == "t,value" and len(cent) == 49
            assert cent[6] == f"5,{c.centroid[d][5]!r}"
            mem = (plots / f"cluster_{c.cluster}_dim_{d}_members.csv").read_text().splitlines()
            assert mem[0] == "t,entity,value" and len(mem) == 1 + 48 * len(c.members)
        # spot-check the alignment of the first member
        i = X.entity_ids.index(c.members[0])
        aligned = shift(X.values[i], c.q[0])[1] * c.alpha[0][1]
        rows = [l.split(",") for l in (plots / f"cluster_{c.cluster}_dim_1_members.csv").read_text().splitlines()[1:]]
        first = [float(v) for t, e, v in rows if e == c.members[0]]
        assert np.allclose(first, aligned, atol=0)


def test_metrics_cli_matches_library(dataset, tmp_path, capsys):
    rep = tmp_path / "r.json"
    _run(["cluster", "--input", dataset, "--mode", "fixed-k", "--k", 3, "--q-max", 4, "--output", rep], capsys)
    code, out, _ = _run(["metrics", "--input", dataset, "--report", rep, "--lag", 1, "--dim", 1,
                         "--ks", 0, 1, "--ks", 1, 2], capsys)
    assert code == 0
    lib = compute_metrics(load_tensor(dataset), ClusteringReport.from_json(rep.read_text()), 1, 1,
                          ks_pairs=[(0, 1), (1, 2)])
    assert json.loads(out) == json.loads(json.dumps(lib))
    code, out2, _ = _run(["metrics", "--input", dataset, "--report", rep, "--lag", 1, "--dim", 1,
                          "--ks", 0, 1, "--ks", 1, 2], capsys)
    assert out2 == out


def test_metrics_periodic_and_identical_totals(tmp_path, capsys):
    path = _periodic_pair(tmp_path)
    rep = tmp_path / "r.json"
    code, _, _ = _run(["cluster", "--input", path, "--mode", "fixed-k", "--k", 2, "--q-max", 0,
                       "--smooth-window", 0, "--lag", 1, "--output", rep], capsys)
    assert code == 0
    code, out, _ = _run(["metrics", "--input", path, "--report", rep, "--lag", 1, "--ks", 0, 1], capsys)
    doc = json.loads(out)
    assert [r["burstiness"] for r in doc["burstiness_memory"]] == [-1.0, -1.0]
    assert doc["ks"][0]["statistic"] == 0.0 and doc["ks"][0]["p_value"] == 1.0
    assert _run(["metrics", "--input", path, "--report", rep, "--ks", 0, 5], capsys)[0] == 1


def test_zero_row_rejected_with_names(tmp_path, capsys):
    p = tmp_path / "z.csv"
    p.write_text("entity,dimension,t,value\na,x,0,1\na,x,1,2\nb,x,0,0\nb,x,1,0\n")
    code, _, err = _run(["cluster", "--input", p, "--mode", "fixed-k", "--k", 1], capsys)
    doc = json.loads(err)
    assert code == 1 and doc["error"] == "DegenerateEntityError" and doc["entities"] == ["b"]


def test_runtime_error_exits_2(dataset, monkeypatch, capsys):
    def boom(*a, **k):
        raise ConvergenceError("eigen-residual too large")

    monkeypatch.setattr(cli, "m_ksc", boom)
    code, _, err = _run(["cluster", "--input", dataset, "--mode", "fixed-k", "--k", 2], capsys)
    assert code == 2 and json.loads(err)["error"] == "ConvergenceError"


def test_score_length_mismatch(dataset, tmp_path, capsys):
    rep = tmp_path / "r.json"
    _run(["cluster", "--input", dataset, "--mode", "fixed-k", "--k", 2, "--output", rep], capsys)
    truth = tmp_path / "t.json"
    truth.write_text('{"truth": [0, 1]}')
    assert _run(["score", "--report", rep, "--truth", truth], capsys)[0] == 1
