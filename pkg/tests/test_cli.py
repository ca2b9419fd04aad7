import csv
import io
import json
import shutil
import subprocess

import numpy as np
import pytest

from fracph.cli import main
from fracph.constructors import bivariate_density
from fracph.frac_phase import fph_density, fph_laplace
from fracph.modelfile import load_model
from fracph.mph import project

FIG3 = "preset:paper-fig3"


def _run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def _rows(text):
    return list(csv.reader(io.StringIO(text)))


@pytest.fixture
def model_file(tmp_path):
    def write(doc):
        path = tmp_path / "model.json"
        path.write_text(json.dumps(doc))
        return str(path)

    return write


def test_sample_fig3(capsys):
    code, out, _ = _run(capsys, "sample", "--model", FIG3, "--n", "1500", "--seed", "7")
    rows = _rows(out)
    assert code == 0 and rows[0] == ["y1", "y2"] and len(rows) == 1501
    Y = np.array(rows[1:], dtype=float)
    assert np.all(Y > 0)
    _, again, _ = _run(capsys, "sample", "--model", FIG3, "--n", "1500", "--seed", "7")
    assert again == out


def test_sample_empty_and_univariate(capsys, model_file):
    code, out, _ = _run(capsys, "sample", "--model", FIG3, "--n", "0")
    assert code == 0 and out == "y1,y2\n"
    path = model_file({"kind": "fph", "pi": [1.0], "T": [[-1.0]], "alpha": 0.7})
    code, out, _ = _run(capsys, "sample", "--model", path, "--n", "3", "--sampler", "product")
    assert code == 0 and _rows(out)[0] == ["x"] and len(_rows(out)) == 4


def test_sample_writes_file(capsys, tmp_path):
    out_path = tmp_path / "pts.csv"
    assert main(["sample", "--model", FIG3, "--n", "5", "--out", str(out_path)]) == 0
    assert len(out_path.read_text().splitlines()) == 6


def test_sample_power_transform(capsys, model_file):
    _, plain, _ = _run(capsys, "sample", "--model", FIG3, "--n", "50", "--seed", "1")
    path = model_file({"kind": "preset", "name": "paper-fig3", "nu": [2.0, 1.0]})
    code, out, _ = _run(capsys, "sample", "--model", path, "--n", "50", "--seed", "1")
    X = np.array(_rows(plain)[1:], dtype=float)
    Y = np.array(_rows(out)[1:], dtype=float)
    assert code == 0
    np.testing.assert_allclose(Y[:, 0], np.sqrt(X[:, 0]), rtol=1e-15)
    np.testing.assert_array_equal(Y[:, 1], X[:, 1])


def test_malformed_model(capsys, model_file):
    code, _, err = _run(capsys, "sample", "--model", model_file({"kind": "ph", "pi": [1.0]}), "--n", "5")
    assert code == 1 and "missing field 'T'" in err
    code, _, err = _run(capsys, "sample", "--model", model_file({"kind": "ph", "pi": [1.0], "T": [[1.0]]}), "--n", "5")
    assert code == 1 and "diagonal" in err


def test_io_errors(capsys, tmp_path):
    code, _, _ = _run(capsys, "sample", "--model", str(tmp_path / "missing.json"), "--n", "5")
    assert code == 3
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, _, _ = _run(capsys, "laplace", "--model", str(bad), "--theta", "1")
    assert code == 3


def test_bad_arguments_exit_one(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["sample", "--model", FIG3, "--n", "5", "--sampler", "bogus"])
    assert exc.value.code == 1
    code, _, _ = _run(capsys, "laplace", "--model", FIG3, "--theta", "1")
    assert code == 1
    code, _, _ = _run(capsys, "density", "--model", FIG3, "--grid", "0:4")
    assert code == 1


def test_density_univariate(capsys, model_file):
    path = model_file({"kind": "fph", "pi": [1.0], "T": [[-1.0]], "alpha": 0.5})
    code, out, _ = _run(capsys, "density", "--model", path, "--grid", "0:2:5")
    rows = np.array(_rows(out)[1:], dtype=float)
    assert code == 0 and rows.shape == (5, 2)
    # the grid starts at the floor because the density diverges at zero
    assert rows[0, 0] == 1e-4
    d = load_model(path).dist
    np.testing.assert_allclose(rows[:, 1], fph_density(d, rows[:, 0]), rtol=1e-15)


def test_density_fig3(capsys):
    code, out, _ = _run(capsys, "density", "--model", FIG3, "--grid", "0:4:5")
    rows = _rows(out)
    assert code == 0 and rows[0] == ["x", "y", "f"] and len(rows) == 26
    table = {(float(x), float(y)): float(f) for x, y, f in rows[1:]}
    d = load_model(FIG3).dist
    assert table[(1.0, 2.0)] == pytest.approx(bivariate_density(d, 1.0, 2.0)[1], rel=1e-15)
    assert table[(2.0, 2.0)] == 0.0


def test_laplace_command(capsys, model_file):
    code, out, _ = _run(capsys, "laplace", "--model", FIG3, "--theta", "0,0", "--theta", "1,2")
    rows = _rows(out)
    assert code == 0 and rows[0] == ["theta1", "theta2", "laplace"]
    assert float(rows[1][2]) == 1.0
    assert float(rows[2][2]) == pytest.approx(0.22360548962514, abs=1e-13)
    path = model_file({"kind": "fph", "pi": [0.3, 0.5], "T": [[-2.0, 1.0], [0.0, -1.0]], "alpha": 0.7})
    code, out, _ = _run(capsys, "laplace", "--model", path, "--theta", "0")
    # the transform counts the atom, so it is one at zero
    assert float(_rows(out)[1][1]) == pytest.approx(1.0)


def test_project_round_trip(capsys, tmp_path):
    out_path = tmp_path / "proj.json"
    code = main(["project", "--model", FIG3, "--w", "1,1", "--out", str(out_path)])
    assert code == 0
    doc = json.loads(out_path.read_text())
    assert doc["kind"] == "fph" and doc["atom"] == 0.0
    back = load_model(str(out_path)).dist
    direct = project(load_model(FIG3).dist, [1.0, 1.0]).dist
    u = np.linspace(0.0, 5.0, 21)
    np.testing.assert_allclose(fph_laplace(back, u), fph_laplace(direct, u), rtol=0, atol=1e-12)


def test_project_identity_emits_input(capsys, model_file):
    pi, T = [0.5, 0.3], [[-2.0, 1.0], [0.5, -1.0]]
    path = model_file({"kind": "mpha", "pi": pi, "T": T, "R": [[1, 0], [0, 1]], "alpha": 0.6})
    code, out, _ = _run(capsys, "project", "--model", path, "--w", "1,1")
    doc = json.loads(out)
    assert code == 0
    assert doc["pi"] == pi and doc["T"] == T and doc["alpha"] == 0.6
    assert doc["atom"] == pytest.approx(0.2)


def test_verify_fast_fig3(capsys):
    code, out, err = _run(capsys, "verify", "--model", FIG3, "--suite", "fast", "--seed", "3")
    reports = [json.loads(line) for line in out.splitlines()]
    assert code == 0, err
    assert all(r["passed"] for r in reports)
    assert {r["name"] for r in reports} >= {"laplace[path]", "laplace[product]", "sampler_agreement",
                                           "projection", "kolmogorov"}
    assert err.count("PASS") == len(reports)


def test_verify_failure_exit_code(capsys, monkeypatch):
    import fracph.cli as cli
    from fracph.verify import CheckReport

    failing = CheckReport("laplace[path]", False, 9.0, 4.0, 10, 0, 0.0, {})
    monkeypatch.setattr(cli, "run_suite", lambda model, suite, seed: [failing])
    code, out, err = _run(capsys, "verify", "--model", FIG3)
    assert code == 2 and "FAIL" in err and json.loads(out)["passed"] is False


@pytest.mark.skipif(shutil.which("fracph") is None, reason="console script not installed")
def test_console_script():
    out = subprocess.run(["fracph", "laplace", "--model", FIG3, "--theta", "0.5,0.5"],
                         capture_output=True, text=True, check=True)
    assert float(_rows(out.stdout)[1][2]) == pytest.approx(0.48923865271855, abs=1e-13)
