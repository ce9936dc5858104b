import json

import numpy as np
import pytest

from privmeasure.bench import bench_accuracy, bench_walk, fit_loglog
from privmeasure.cli import main, parse_grid
from privmeasure.dataio import SCHEMA_VERSION, ingest
from privmeasure.errors import ArgumentError, InputError
from privmeasure.metric import choose_delta
from privmeasure.synth import choose_m


@pytest.fixture
def points_csv(tmp_path):
    rng = np.random.default_rng(0)
    path = tmp_path / "points.csv"
    np.savetxt(path, rng.random((100, 2)), delimiter=",")
    return path


def test_ingest_csv(tmp_path):
    path = tmp_path / "a.csv"
    path.write_text("0.1,0.2\n0.3,0.4\n")
    data = ingest(path, "csv", d=2)
    assert data.n == 2
    assert data.space.coords.tolist() == [[0.1, 0.2], [0.3, 0.4]]


def test_ingest_rejections(tmp_path):
    cases = {
        "empty.csv": "",
        "nan.csv": "0.1,0.2\nnan,0.3\n",
        "range.csv": "0.1,0.2\n0.3,1.2\n",
        "ragged.csv": "0.1,0.2\n0.3\n",
        "text.csv": "0.1,abc\n",
    }
    rows = {"nan.csv": 2, "range.csv": 2, "ragged.csv": 2, "text.csv": 1}
    for name, text in cases.items():
        path = tmp_path / name
        path.write_text(text)
        with pytest.raises(InputError) as err:
            ingest(path)
        assert err.value.row == rows.get(name)
        assert str(path) in str(err.value)
    with pytest.raises(InputError):
        ingest(tmp_path / "points.csv", d=3)


def test_ingest_distance_matrix(tmp_path):
    good = [[0, 1, 2], [1, 0, 1], [2, 1, 0]]
    path = tmp_path / "m.json"
    path.write_text(json.dumps({"distance_matrix": good, "dataset": [0, 0, 2]}))
    data = ingest(path)
    assert data.space.matrix.tolist() == good
    assert data.points.tolist() == [0, 0, 2]
    bad = [[0, 1, 2], [1.001, 0, 1], [2, 1, 0]]
    path.write_text(json.dumps({"distance_matrix": bad}))
    with pytest.raises(InputError) as err:
        ingest(path)
    assert err.value.row == 1
    csv_path = tmp_path / "m.csv"
    csv_path.write_text("0,1\n1,0\n")
    assert ingest(csv_path, matrix=True).space.diam == 1


def test_ingest_json_points_and_weights(tmp_path):
    path = tmp_path / "p.json"
    path.write_text(json.dumps({"points": [[0.1], [0.9]], "weights": [1, 3]}))
    data = ingest(path)
    assert data.weights.tolist() == [0.25, 0.75]
    path.write_text("[[0.5, 0.5]]")
    assert ingest(path).n == 1
    path.write_text("{not json")
    with pytest.raises(InputError):
        ingest(path)


def test_synth_command_is_deterministic(tmp_path, points_csv):
    outs = []
    for k in range(2):
        out, prov = tmp_path / f"y{k}.csv", tmp_path / f"y{k}.json"
        code = main(["synth", "--input", str(points_csv), "--epsilon", "1", "--seed", "11",
                     "--output", str(out), "--provenance", str(prov)])
        assert code == 0
        outs.append((out.read_bytes(), prov.read_bytes()))
    assert outs[0] == outs[1]
    doc = json.loads(outs[0][1])
    assert doc["schema"] == SCHEMA_VERSION
    assert doc["alpha"] == 100.0 and doc["seed"] == 11
    assert doc["delta"] == choose_delta("cube", 100, d=2)
    assert doc["m"] == choose_m(doc["net_size"], 1.0, doc["delta"])
    assert "tour_length" in doc
    lines = outs[0][0].decode().splitlines()
    assert lines[0] == "x1,x2"
    assert len(lines) - 1 == doc["m"]


def test_privatize_command(tmp_path):
    path = tmp_path / "m.csv"
    path.write_text("0.1,1\n0.4,2\n0.8,1\n")
    out = tmp_path / "o.csv"
    assert main(["privatize", "--input", str(path), "--weighted", "--interval", "--alpha", "8",
                 "--output", str(out)]) == 0
    rows = out.read_text().splitlines()
    assert rows[0] == "x1,weight" and len(rows) == 9
    assert sum(float(r.split(",")[1]) for r in rows[1:]) == pytest.approx(1)
    assert main(["privatize", "--input", str(path), "--weighted", "--alpha", "8",
                 "--output", str(out), "--delta", "0.25"]) == 0


def test_validation_exit_codes(tmp_path, points_csv):
    out = str(tmp_path / "z.csv")
    bad = tmp_path / "bad.csv"
    bad.write_text("0.1,0.2\n0.3,1.4\n")
    assert main(["synth", "--input", str(bad), "--epsilon", "1", "--output", out]) == 2
    assert main(["synth", "--input", str(tmp_path / "missing.csv"), "--epsilon", "1",
                 "--output", out]) == 2
    assert main(["synth", "--input", str(points_csv), "--epsilon", "-1", "--output", out]) == 2
    assert main(["synth", "--input", str(points_csv), "--epsilon", "1",
                 "--output", str(tmp_path / "no" / "dir.csv")]) == 2
    assert main(["nonsense"]) == 2


def test_audit_command(tmp_path, capsys):
    report = tmp_path / "audit.json"
    assert main(["audit-regularity", "--levels", "1:6", "--pairs", "2000",
                 "--report", str(report)]) == 0
    doc = json.loads(report.read_text())
    assert doc["passed"] and doc["violations"] == 0
    assert main(["audit-regularity", "--levels", "3", "--pairs", "2000",
                 "--fault-scale", "4"]) == 3
    err = capsys.readouterr().err
    assert "FAIL" in err and "witness x=" in err


def test_bench_commands(tmp_path):
    out, rep = tmp_path / "b.csv", tmp_path / "b.json"
    assert main(["bench-accuracy", "--mode", "interval", "--grid", "4:8", "--trials", "10",
                 "--output", str(out), "--report", str(rep)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("param,alpha,trials,mean_w1")
    assert [int(l.split(",")[0]) for l in lines[1:]] == [16, 32, 64, 128, 256]
    assert "slope" in json.loads(rep.read_text())
    assert main(["bench-walk", "--grid", "4:6", "--trials", "20",
                 "--output", str(out)]) == 0


def test_parse_grid():
    assert parse_grid("4:6") == [16, 32, 64]
    assert parse_grid("10,20") == [10, 20]
    with pytest.raises(ArgumentError):
        parse_grid("6:4")


def test_fit_loglog_recovers_power_law():
    x = np.array([2.0, 4, 8, 16, 32])
    slope, intercept, stderr = fit_loglog(x, 3 * x ** -0.7)
    assert slope == pytest.approx(-0.7) and intercept == pytest.approx(np.log(3))
    assert stderr < 1e-6


def test_benchmarks_independent_of_worker_count():
    a = bench_accuracy("interval", grid=[16, 32], trials=6, seed=3)
    b = bench_accuracy("interval", grid=[16, 32], trials=6, seed=3, workers=2)
    assert [r["mean_w1"] for r in a["rows"]] == [r["mean_w1"] for r in b["rows"]]
    w1 = bench_walk(grid=[16, 32], trials=10, seed=1)
    w2 = bench_walk(grid=[16, 32], trials=10, seed=1, workers=2)
    assert w1["rows"] == w2["rows"]


def test_cube_and_synth_bench_rows():
    rep = bench_accuracy("cube", grid=[64, 128], trials=3, seed=0)
    assert all(r["mean_w1"] > 0 for r in rep["rows"])
    rep = bench_accuracy("synth", grid=[256, 512], trials=2, seed=0)
    assert rep["rows"][0]["alpha"] == 256.0
