import json
import subprocess
import sys

import pytest

from genus_forge.cli import main


@pytest.fixture
def k3(tmp_path):
    p = tmp_path / "k3.json"
    p.write_text(json.dumps({"dim": 4, "pontryagin_numbers": {"p1": -48}}))
    return str(p)


@pytest.fixture
def string4(tmp_path):
    p = tmp_path / "s4.json"
    p.write_text(json.dumps({"dim": 4, "pontryagin_numbers": {"p1": 0}, "rational_string": True}))
    return str(p)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_genus_ahat_k3(capsys, k3):
    code, out, _ = run(capsys, "genus", "--class", "ahat", "--manifold", k3)
    assert code == 0 and out.strip() == "2"


def test_genus_witten_csv(capsys, k3):
    code, out, _ = run(capsys, "genus", "--class", "witten", "--manifold", k3,
                       "--q-order", "3", "--format", "csv")
    assert code == 0
    assert out.splitlines()[1:] == ["0,1,2,1", "1,1,-48,1", "2,1,-144,1"]


def test_genus_string(capsys, string4):
    code, out, _ = run(capsys, "genus", "--class", "witten-string", "--manifold", string4)
    assert code == 0 and out.strip() == "0"


def test_genus_witten_star(capsys, k3):
    code, out, _ = run(capsys, "genus", "--class", "witten-star", "--manifold", k3)
    assert code == 0 and "E2s" in out


def test_qexpand_e2(capsys):
    code, out, _ = run(capsys, "qexpand", "--series", "e2k", "--k", "1", "--order", "4")
    rows = out.splitlines()[1:]
    assert code == 0
    assert [r.split(",")[2] for r in rows] == ["1", "-24", "-72", "-96"]


def test_qexpand_eta_exponents(capsys):
    code, out, _ = run(capsys, "qexpand", "--series", "eta", "--order", "3")
    assert out.splitlines()[1:] == ["1,24,1,1", "25,24,-1,1", "49,24,-1,1"]


def test_qexpand_lattice_units(capsys):
    code, out, _ = run(capsys, "qexpand", "--series", "e2star-coeffs", "--order", "2",
                       "--convention", "paper")
    assert code == 0 and out.startswith("# holomorphic part")


def test_det_numeric(capsys, tmp_path):
    f = tmp_path / "r.json"
    f.write_text(json.dumps({"matrix": [[0, 1], [-1, 0]]}))
    code, out, _ = run(capsys, "det", "--model", "1-1", "--curvature", str(f), "--radius", "1",
                       "--relative", "--oracle", "--modes", "1000")
    assert code == 0
    assert abs(float(out.splitlines()[0].split()[1]) - 0.9595173756674719) < 1e-15
    assert float(out.splitlines()[-1].split()[-1]) < 1e-4


def test_det_table_and_21(capsys, tmp_path):
    f = tmp_path / "r.txt"
    f.write_text("0 0.2\n-0.2 0\n")
    code, out, _ = run(capsys, "det", "--model", "2-1", "--curvature", str(f), "--tau", "0.1+1.2i",
                       "--relative")
    assert code == 0 and out.startswith("sdet_zeta ")


def test_det_formal(capsys, tmp_path):
    f = tmp_path / "r.json"
    f.write_text(json.dumps({"matrix": [["0", "dx1*dx2 + dx3*dx4"], ["-dx1*dx2 - dx3*dx4", "0"]]}))
    code, out, _ = run(capsys, "det", "--model", "1-1", "--curvature", str(f), "--radius", "1")
    # Tr R^2 = -4 w with w = dx1dx2dx3dx4, p1 = w/(2 pi^2), so the top term is -w/(48 pi^2)
    assert code == 0
    assert out.strip() == "1 - 1/48*pi^-2*dx1*dx2*dx3*dx4"


@pytest.mark.parametrize("argv", [
    ["genus", "--class", "ahat", "--manifold", "/nonexistent.json"],
    ["det", "--model", "1-1", "--curvature", "/nonexistent"],
    ["qexpand", "--series", "e2k", "--order", "0"],
    ["verify", "--tol", "-1"],
])
def test_input_errors_exit_2(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2 and err.startswith("error:")


def test_bad_curvature(capsys, tmp_path):
    f = tmp_path / "r.json"
    f.write_text(json.dumps({"matrix": [[0, 1], [1, 0]]}))
    code, _, err = run(capsys, "det", "--model", "1-1", "--curvature", str(f), "--radius", "1")
    assert code == 2 and "skew" in err


def test_missing_pontryagin_number_exit_2(capsys, tmp_path):
    f = tmp_path / "m.json"
    f.write_text(json.dumps({"dim": 8, "pontryagin_numbers": {"p1^2": 1}}))
    code, _, err = run(capsys, "genus", "--class", "ahat", "--manifold", str(f))
    assert code == 2 and "p2" in err


def test_argparse_usage_error():
    with pytest.raises(SystemExit) as e:
        main(["frobnicate"])
    assert e.value.code == 2


def test_verify_suite_deterministic(capsys, monkeypatch):
    code, out1, _ = run(capsys, "verify", "--suite", "anomaly", "--seed", "3")
    monkeypatch.setenv("GENUSFORGE_THREADS", "3")
    _, out2, _ = run(capsys, "verify", "--suite", "anomaly", "--seed", "3")
    assert code == 0 and out1 == out2
    assert out1.splitlines()[-1] == "4/4 checks passed"


def test_verify_failure_exit_1(capsys):
    # an absurd tolerance makes the numeric checks fail
    code, out, _ = run(capsys, "verify", "--suite", "modular", "--tol", "1e-300")
    assert code == 1 and "FAIL modular.e2_transformation" in out


def test_bad_thread_count(capsys, monkeypatch):
    monkeypatch.setenv("GENUSFORGE_THREADS", "zero")
    code, _, err = run(capsys, "verify", "--suite", "series")
    assert code == 2


def test_module_entry_point(k3):
    out = subprocess.run([sys.executable, "-m", "genus_forge", "genus", "--class", "ahat",
                          "--manifold", k3], capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.strip() == "2"
