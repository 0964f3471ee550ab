import json

import pytest

from ising_qubits.cli import EXIT_OK, EXIT_USAGE, EXIT_VIOLATION, main
from ising_qubits.utils import presets
from ising_qubits.utils.presets import CheckResult

BELL_PROGRAM = "qubits 2\nmap direct15\nstate product:+3,+3\nH 1\nCNOT 1 2\n"


@pytest.fixture
def write(tmp_path):
    def _write(name, content):
        path = tmp_path / name
        path.write_text(content)
        return str(path)

    return _write


def test_run_prints_json_report(write, capsys):
    assert main(["run", write("bell.qc", BELL_PROGRAM), "--seed", "0"]) == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert report["passed"] is True
    assert len(report["layers"]) == 3


def test_run_writes_report_directory(write, tmp_path, capsys):
    out = tmp_path / "reports"
    assert main(["run", write("bell.qc", BELL_PROGRAM), "--format", "csv", "--out", str(out)]) == EXIT_OK
    assert (out / "report.csv").exists()
    assert capsys.readouterr().out.strip().endswith("report.csv")


def test_run_syntax_error_is_usage_error(write, capsys):
    """Syntax errors print path:line:column and exit 2"""
    path = write("bad.qc", "qubits 3\n")
    assert main(["run", path]) == EXIT_USAGE
    assert f"{path}:1:8:" in capsys.readouterr().err


def test_run_missing_file(capsys):
    assert main(["run", "/nonexistent/circuit.qc"]) == EXIT_USAGE
    assert capsys.readouterr().err.startswith("error:")


def test_run_unavailable_gate_is_violation(write, capsys):
    assert main(["run", write("t.qc", "qubits 1\nT 1\n")]) == EXIT_VIOLATION
    assert "signed3" in capsys.readouterr().err


def test_verify_preset(capsys):
    assert main(["verify", "spectra"]) == EXIT_OK
    assert capsys.readouterr().out.strip().endswith("3/3 checks passed")


def test_verify_reports_failures(monkeypatch, capsys):
    """A failed check exits 1"""
    monkeypatch.setitem(presets.PRESETS, "spectra", lambda seed=None: [CheckResult("spectra/forced", False, "x")])
    assert main(["verify", "spectra"]) == EXIT_VIOLATION
    assert "FAIL" in capsys.readouterr().out


def test_verify_unknown_preset():
    with pytest.raises(SystemExit) as excinfo:
        main(["verify", "bogus"])
    assert excinfo.value.code == EXIT_USAGE


def test_spectrum_command(write, capsys):
    assert main(["spectrum", write("chain.txt", "step attractor\nstep sp\n")]) == EXIT_OK
    reports = json.loads(capsys.readouterr().out)
    assert [r["name"] for r in reports] == ["attractor", "sp"]


def test_spectrum_syntax_error(write, capsys):
    path = write("chain.txt", "step nope\n")
    assert main(["spectrum", path]) == EXIT_USAGE
    assert f"{path}:1:6:" in capsys.readouterr().err


def test_continuous_circle(capsys):
    assert main(["continuous", "circle", "--directions", "4"]) == EXIT_OK
    lines = capsys.readouterr().out.strip().split("\n")
    assert lines[0].startswith("e_x,")
    assert len(lines) == 5


def test_continuous_quadrature_to_file(tmp_path, capsys):
    assert main(["continuous", "quadrature", "--directions", "6", "--rho", "0.6,0,0.8",
                 "--out", str(tmp_path)]) == EXIT_OK
    assert (tmp_path / "quadrature.csv").read_text().count("\n") == 7


def test_continuous_bad_rho(capsys):
    """Unparseable input is a usage error, a Bloch vector outside the ball a violation"""
    assert main(["continuous", "quadrature", "--rho", "a,b,c"]) == EXIT_USAGE
    assert main(["continuous", "quadrature", "--rho", "2,0,0"]) == EXIT_VIOLATION
