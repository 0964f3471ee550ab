import json

import numpy as np
import pytest

from ising_qubits.utils.base import (
    CircuitSyntaxError,
    DimensionMismatchError,
    GateUnavailableError,
    QuantumConditionError,
)
from ising_qubits.utils.circuit import (
    compile_and_run,
    compile_program,
    emit_report,
    format_circuit,
    load_state,
    parse_circuit,
    report_csv,
)
from ising_qubits.utils.classical_ops import MarkovOp
from ising_qubits.utils.quantum_core import pauli_basis

BELL_PROGRAM = """
# prepare a Bell pair
qubits 2
map direct15
state product:+3,+3
H 1
CNOT 1 2
"""


def test_parse_bell_program():
    """Header and gates are read in order"""
    program = parse_circuit(BELL_PROGRAM)
    assert program.qubits == 2
    assert program.map_name == "direct15"
    assert [str(g) for g in program.gates] == ["H 1", "CNOT 1 2"]
    assert program.gates[1].line == 7


def test_parse_defaults():
    """Map and state default per qubit count"""
    program = parse_circuit("qubits 1\nh 1\n")
    assert program.map_name == "direct3"
    assert program.state == "product:+3"
    assert program.gates[0].name == "H"


def test_format_roundtrip():
    """Formatted programs parse back to the same program"""
    program = parse_circuit(BELL_PROGRAM)
    assert parse_circuit(format_circuit(program)) == program


@pytest.mark.parametrize(
    "text, line, column",
    [
        ("qubits 3\n", 1, 8),
        ("H 1\n", 1, 1),
        ("qubits 1\n  FOO 1\n", 2, 3),
        ("qubits 1\nH 2\n", 2, 3),
        ("qubits 1\nqubits 1\n", 2, 1),
        ("qubits 1\nmap direct7\n", 2, 5),
        ("qubits 1\nstate product:+4\n", 2, 7),
        ("qubits 2\nCNOT 1 1\n", 2, 1),
        ("qubits 2\nCNOT 1\n", 2, 1),
        ("qubits 1\noutput rho spectrum\n", 2, 12),
        ("qubits 1\nH 1\nmap direct3\n", 3, 1),
    ],
)
def test_syntax_errors_carry_position(text, line, column):
    """The first error is reported with its 1-based line and column"""
    with pytest.raises(CircuitSyntaxError) as excinfo:
        parse_circuit(text)
    assert (excinfo.value.line, excinfo.value.column) == (line, column)
    assert str(excinfo.value).startswith(f"line {line}, col {column}: ")


def test_load_state_presets():
    """Product, Bell, theta and explicit coefficient presets"""
    basis = pauli_basis(2)
    product = load_state("product:-1,+3", 2)
    assert product.coefficients[basis.index("10")] == pytest.approx(-1.0)
    assert product.coefficients[basis.index("13")] == pytest.approx(-1.0)
    np.testing.assert_allclose(load_state("rho:0,0,1", 1).coefficients, [0.0, 0.0, 1.0])
    assert load_state("bell", 2).coefficients[basis.index("33")] == pytest.approx(-1.0)
    for bad, Q in (("bell", 1), ("theta:abc", 2), ("rho:1,2", 1), ("mixed", 1)):
        with pytest.raises(CircuitSyntaxError):
            load_state(bad, Q)


def test_bell_program_runs_clean():
    """Every layer stays positive and the final state is the Bell state"""
    report = compile_and_run(parse_circuit(BELL_PROGRAM), seed=0)
    assert report.passed
    assert len(report.layers) == 3
    basis = pauli_basis(2)
    final = report.layers[-1]["rho_z"]
    assert final[basis.index("11")] == pytest.approx(1.0, abs=1e-12)
    assert final[basis.index("22")] == pytest.approx(-1.0, abs=1e-12)
    assert final[basis.index("33")] == pytest.approx(1.0, abs=1e-12)
    assert report.layers[-1]["pure"]


def test_local_gates_on_correlation_map():
    """Entangled family states survive local gates on six spins"""
    text = "qubits 2\nmap correlation6\nstate theta:0.3\nH 1\nSWAP 1 2\nCONJ\n"
    report = compile_and_run(parse_circuit(text), seed=1)
    assert report.passed
    assert report.map_name == "correlation6"


def test_t_gate_needs_signed_map():
    """T on three spins names the map that realizes it"""
    program = parse_circuit("qubits 1\nT 1\n")
    with pytest.raises(GateUnavailableError, match=r"line 2: .*use map signed3"):
        compile_program(program)
    compiled = compile_program(parse_circuit("qubits 1\nmap signed3\nT 1\n"))
    assert isinstance(compiled[0][1], MarkovOp)


def test_map_qubit_mismatch():
    with pytest.raises(DimensionMismatchError):
        compile_program(parse_circuit("qubits 1\nmap direct15\n"))


def test_non_positive_initial_state():
    """Initial states outside the Bloch ball are refused before running"""
    with pytest.raises(QuantumConditionError):
        compile_and_run(parse_circuit("qubits 1\nstate rho:1,1,0\nH 1\n"))


def test_output_selection():
    """Only the requested per-layer fields are reported"""
    report = compile_and_run(parse_circuit("qubits 1\noutput rho probabilities\nH 1\n"), seed=0)
    layer = report.layers[-1]
    assert "p" in layer and "rho_z" in layer
    assert "fidelity" not in layer and "eigenvalues" not in layer


def test_emit_report_is_deterministic(tmp_path):
    """Identical runs write byte-identical reports"""
    paths = []
    for name in ("first", "second"):
        report = compile_and_run(parse_circuit(BELL_PROGRAM), seed=7)
        paths.append(emit_report(report, "json", str(tmp_path / name)))
    contents = [open(path, "rb").read() for path in paths]
    assert contents[0] == contents[1]
    assert json.loads(contents[0])["passed"] is True


def test_csv_report_columns(tmp_path):
    """One row per layer with the 15 coefficients"""
    report = compile_and_run(parse_circuit(BELL_PROGRAM), seed=0)
    lines = report_csv(report).strip().split("\n")
    assert len(lines) == 4
    assert len(lines[0].split(",")) == 20
    assert lines[0].startswith("t,gate,positive,pure,fidelity,rho_01")
    path = emit_report(report, "csv", str(tmp_path))
    assert path.endswith("report.csv")
    with pytest.raises(ValueError):
        emit_report(report, "xml", str(tmp_path))
