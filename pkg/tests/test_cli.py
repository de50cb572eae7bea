import csv
import io
import json
from pathlib import Path

import pytest

from ltladder.cli import main

DATA = Path(__file__).parent / "data"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    return code, json.loads(out) if out else None, err


class TestExamples:
    def test_verify_theorem4(self, capsys):
        # the unmatched level lam_2 = 1 of PT(2) enters the tail, so the
        # margin is 4 - 2 = 2
        code, doc, _ = run_json(capsys, "verify", "--name", "theorem4", "--nu", "1", "--perturbation", "sech2:4")
        assert code == 0
        assert doc["result"]["holds"] is True
        assert doc["result"]["margin"] == pytest.approx(2.0, abs=1e-3)
        assert doc["config"]["family"] == "poschl-teller" and doc["config"]["nu"] == 1.0

    def test_spectrum_pt2(self, capsys):
        code, doc, _ = run_json(capsys, "spectrum", "--family", "poschl-teller", "--nu", "2")
        assert code == 0
        assert doc["result"]["eigenvalues"] == pytest.approx([-4.0, -1.0], abs=1e-6)

    def test_theorem3_rejects_small_nu(self, capsys):
        code, out, err = run(capsys, "verify", "--name", "theorem3", "--nu", "-0.6", "--kappa", "2", "--k-max", "1", "--perturbation", "sech2:1")
        assert code == 2 and out == "" and "nu" in err


class TestExitCodes:
    def test_usage_errors(self, capsys):
        assert run(capsys, "frobnicate")[0] == 2
        assert run(capsys, "spectrum")[0] == 2
        assert run(capsys, "spectrum", "--family", "gaussian")[0] == 2
        assert run(capsys, "verify", "--nu", "1")[0] == 2
        assert run(capsys, "spectrum", "--family", "coulomb", "--nu", "0", "--kappa", "2")[0] == 2
        assert run(capsys, "spectrum", "--family", "zero", "--grid-n", "2")[0] == 2
        assert run(capsys, "scan", "--values", "1,2", "--perturbation", "sech2:1")[0] == 2
        assert run(capsys, "verify", "--name", "theorem1", "--perturbation", "lorentz:1")[0] == 2

    def test_numerical_failure(self, capsys):
        code, out, err = run(capsys, "spectrum", "--family", "zero")
        assert code == 3 and out == "" and "numerical failure" in err

    def test_violation_exit_one(self, capsys):
        code, doc, _ = run_json(capsys, "corpus", "--target", "log-concavity-double-well", "--n", "2", "--seed", "1")
        assert code == 1 and doc["result"]["n_holds"] == 0

    def test_missing_config_file(self, capsys, tmp_path):
        assert run(capsys, "spectrum", "--config", str(tmp_path / "nope.json"))[0] == 2


class TestConfig:
    def test_precedence(self, capsys, tmp_path):
        cfg = tmp_path / "run.json"
        cfg.write_text(json.dumps({"family": "poschl-teller", "nu": 3.0, "grid_n": 3001, "levels": 2}))
        _, doc, _ = run_json(capsys, "spectrum", "--config", str(cfg))
        assert doc["config"]["nu"] == 3.0 and doc["config"]["grid_n"] == 3001
        assert doc["result"]["eigenvalues"] == pytest.approx([-9.0, -4.0], abs=1e-5)
        _, doc, _ = run_json(capsys, "spectrum", "--config", str(cfg), "--nu", "1")
        assert doc["config"]["nu"] == 1.0 and doc["config"]["grid_n"] == 3001
        assert doc["result"]["eigenvalues"] == pytest.approx([-1.0], abs=1e-5)

    def test_defaults_are_reference_grid(self, capsys):
        _, doc, _ = run_json(capsys, "spectrum", "--family", "coulomb", "--nu", "0", "--kappa", "2", "--k-max", "2")
        c = doc["config"]
        assert (c["grid_min"], c["grid_max"], c["grid_n"]) == (0.0, 60.0, 6001)
        assert c["domain"] == "half-line" and c["bc"] == "dirichlet"
        assert doc["result"]["eigenvalues"] == pytest.approx([-1.0, -0.25], abs=1e-5)

    def test_unknown_config_key(self, capsys, tmp_path):
        cfg = tmp_path / "run.json"
        cfg.write_text(json.dumps({"family": "zero", "colour": "red"}))
        assert run(capsys, "spectrum", "--config", str(cfg))[0] == 2


class TestOutput:
    def test_csv_golden(self, capsys):
        code, out, _ = run(capsys, "verify", "--name", "theorem4", "--nu", "1", "--perturbation", "sech2:4", "--format", "csv")
        assert code == 0
        assert out == (DATA / "verify_theorem4.csv").read_text()

    def test_byte_stable_json(self, capsys):
        argv = ("lift", "--family", "poschl-teller", "--nu", "2", "--perturbation", "gaussian:2", "-K", "2")
        first = run(capsys, *argv)[1]
        assert first == run(capsys, *argv)[1]
        doc = json.loads(first)
        assert doc["result"]["K"] == 2 and doc["result"]["lifted_eigenvalues"] == []

    def test_csv_layout(self, capsys):
        _, out, _ = run(capsys, "spectrum", "--family", "poschl-teller", "--nu", "2", "--format", "csv")
        lines = out.splitlines()
        assert lines[0].startswith("# config {")
        body = list(csv.reader(io.StringIO("\n".join(l for l in lines if not l.startswith("#")))))
        assert body[0] == ["k", "energy"]
        assert [row[0] for row in body[1:]] == ["1", "2"]
        assert all(row[1] == f"{float(row[1]):.12g}" for row in body[1:])
        assert float(body[1][1]) == pytest.approx(-4.0, abs=1e-6)

    def test_out_file(self, capsys, tmp_path):
        target = tmp_path / "spec.json"
        code, out, _ = run(capsys, "spectrum", "--family", "poschl-teller", "--nu", "1", "--out", str(target))
        assert code == 0 and out == ""
        assert json.loads(target.read_text())["config"]["out"] == str(target)


class TestCommands:
    def test_lift(self, capsys):
        code, doc, _ = run_json(capsys, "lift", "--family", "poschl-teller", "--nu", "1", "--perturbation", "sech2:4")
        assert code == 0
        (step,) = doc["result"]["steps"]
        assert step["mu"] == pytest.approx(1.0, abs=1e-6) and step["lambda"] == pytest.approx(4.0, abs=1e-6)
        assert doc["result"]["error_term"] == pytest.approx(-0.5, abs=1e-3)

    def test_corpus(self, capsys, tmp_path):
        code, doc, err = run_json(capsys, "corpus", "--target", "theorem4", "--n", "3", "--seed", "42", "--dump-dir", str(tmp_path))
        assert code == 0 and doc["result"]["n_holds"] == 3
        assert len(doc["result"]["cases"]) == 3 and "runtime_s" not in doc["result"]
        assert "3/3 hold" in err
        assert list(tmp_path.iterdir()) == []

    def test_scan(self, capsys):
        code, doc, _ = run_json(capsys, "scan", "--nu", "1", "--family", "poschl-teller", "--perturbation", "sech2:t", "--values", "4,2,1,0")
        assert code == 0
        rows = doc["result"]["rows"]
        assert [r["parameter"] for r in rows] == [4.0, 2.0, 1.0, 0.0]
        assert rows[0]["margin"] == pytest.approx(3.0, abs=1e-3)
        assert rows[-1]["margin"] == 0.0

    def test_file_potential(self, capsys, tmp_path):
        import numpy as np

        x = np.linspace(-20.0, 20.0, 4001)
        path = tmp_path / "pt.dat"
        path.write_text("# PT(1)\n" + "\n".join(f"{a:.17g} {2.0 / np.cosh(a) ** 2:.17g}" for a in x) + "\n")
        code, doc, _ = run_json(capsys, "spectrum", "--family", "file", "--potential-file", str(path))
        assert code == 0
        assert doc["result"]["eigenvalues"] == pytest.approx([-1.0], abs=1e-6)

    def test_robin_verify(self, capsys):
        code, doc, _ = run_json(
            capsys, "verify", "--name", "theorem2", "--family", "gaussian", "--depth", "3", "--domain", "half-line",
            "--sigma", "-0.5", "--perturbation", "sech2:2:1:1",
        )
        assert code == 0 and doc["config"]["bc"] == "robin"
        assert doc["result"]["params"]["sigma"] == -0.5
