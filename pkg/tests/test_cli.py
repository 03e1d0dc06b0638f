import csv
import json

import pytest

from gmtlab.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def test_heisenberg_distance(capsys):
    code, out = run(capsys, "heisenberg", "distance", "--metric", "koranyi", "--q", "0,0,0.25")
    assert code == 0 and json.loads(out)["distance"] == pytest.approx(1.0)


def test_alpha_beta_and_profile(capsys, tmp_path):
    code, out = run(capsys, "heisenberg", "alpha-beta")
    doc = json.loads(out)
    assert doc["ratio"] == pytest.approx(2.0, rel=1e-9)
    path = tmp_path / "profile.csv"
    assert main(["heisenberg", "profile", "--metric", "koranyi", "--out", str(path)]) == 0
    rows = list(csv.DictReader(path.open()))
    assert float(rows[0]["t_high"]) == pytest.approx(0.25)


def test_curve_measure(capsys, tmp_path):
    from gmtlab.heisenberg import CurveSpec

    path = tmp_path / "curve.json"
    path.write_text(json.dumps(CurveSpec.vertical_segment(0.4).to_json()))
    code, out = run(capsys, "heisenberg", "curve-measure", "--curve", str(path), "--interval", "0.1,0.3")
    assert code == 0 and json.loads(out)["intrinsic_measure"] == pytest.approx(0.2, rel=1e-9)


def test_measure_estimate(capsys, tmp_path):
    code, out = run(capsys, "measure-estimate", "--target",
                    '{"segment": {"start": [0, 0], "end": [1, 0], "n_samples": 2001}}', "--delta-ladder", "0.5,0.25")
    assert code == 0 and json.loads(out)["extrapolated"] == pytest.approx(1.0, rel=0.02)
    space = tmp_path / "space.json"
    space.write_text(json.dumps({"labels": ["a", "b"], "distances": [[0, 1], [1, 0]]}))
    cands = json.dumps([{"set": ["a"], "size": 1}, {"set": ["b"], "size": 1}, {"set": ["a", "b"], "size": 1.5}])
    code, out = run(capsys, "measure-estimate", "--space-file", str(space), "--target", '{"cloud": ["a", "b"]}',
                    "--delta-ladder", "2", "--candidates", cands, "--exact")
    assert json.loads(out)["extrapolated"] == 1.5


def test_density_command(capsys):
    code, out = run(capsys, "density", "--mode", "centered", "--measure", '{"arclength": {"start": [0, 0], "end": [1, 0]}}',
                    "--point", "0.5,0", "--ladder", "0.1,0.01")
    assert code == 0 and json.loads(out)["extrapolated"] == pytest.approx(2.0, rel=1e-6)


def test_run_writes_report_and_csv(tmp_path, capsys):
    out, table = tmp_path / "r.json", tmp_path / "r.csv"
    code = main(["run", "metric_axioms", "--config", '{"samples": 20}', "--out", str(out), "--csv", str(table)])
    assert code == 0
    assert json.loads(out.read_text())["passed"] is True
    assert next(csv.reader(table.open()))[:2] == ["experiment", "quantity"]


def test_exit_codes(capsys):
    assert main(["run", "ratio_bound", "--config", '{"bogus": 1}']) == 2
    assert main(["run", "ratio_bound", "--config", '{"tol_stability": 0.0}']) == 1
    with pytest.raises(SystemExit):
        main(["run", "not_an_experiment"])
