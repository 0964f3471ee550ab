"""
Circuit programs: a line-oriented gate language compiled to classical operations on
Ising-spin distributions, with per-layer quantum-condition reports
"""

import csv
import io
import json
import logging
import math
import os
from dataclasses import dataclass, field
from functools import reduce
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from .base import CircuitSyntaxError, DimensionMismatchError, GateUnavailableError, QuantumConditionError
from .bitq_maps import MAP_NAMES, extract_rho, make_map, sample_quantum_distribution
from .classical_ops import ClassicalOp, gate_realization
from .entangled import family_rho
from .qcond import positivity_report
from .quantum_core import (
    GATE_NAMES,
    PAULI,
    GateSpec,
    QuantumDensityMatrix,
    apply_unitary,
    gate,
    gate_arity,
    pauli_basis,
    rho_from_coefficients,
)

logger = logging.getLogger(__name__)

HEADER_KEYS = ("qubits", "map", "state", "output")
OUTPUTS = ("rho", "qcond", "fidelity", "probabilities")
DEFAULT_OUTPUTS = ("rho", "qcond", "fidelity")
DEFAULT_MAPS = {1: "direct3", 2: "direct15"}
FIDELITY_TOL = 1e-10


@dataclass(frozen=True)
class GateStatement:
    name: str
    targets: Tuple[int, ...]
    line: int = field(default=0, compare=False)

    def __str__(self) -> str:
        return " ".join([self.name, *(str(t) for t in self.targets)])


@dataclass(frozen=True)
class CircuitProgram:
    """Header (qubits, map, initial state, outputs) and the ordered gate statements"""

    qubits: int
    map_name: str
    state: str
    gates: Tuple[GateStatement, ...] = ()
    outputs: Tuple[str, ...] = DEFAULT_OUTPUTS


def _product_state(spec: str, Q: int) -> QuantumDensityMatrix:
    entries = [entry.strip() for entry in spec.split(",")]
    if len(entries) != Q:
        raise CircuitSyntaxError(f"product state needs {Q} entries, got {len(entries)}")
    factors = []
    for entry in entries:
        if len(entry) != 2 or entry[0] not in "+-" or entry[1] not in "123":
            raise CircuitSyntaxError(f"bad product entry '{entry}', expected +k or -k with k in 1..3")
        sign = 1.0 if entry[0] == "+" else -1.0
        factors.append((PAULI[0] + sign * PAULI[int(entry[1])]) / 2)
    return QuantumDensityMatrix(Q, reduce(np.kron, factors))


def load_state(spec: str, Q: int) -> QuantumDensityMatrix:
    """
    Initial density matrix from a state preset.

    Presets: product:+3,-1 (one signed axis per qubit), bell, theta:<float> (the entangled
    family, two qubits) and rho:<c1>,<c2>,... (explicit coefficients rho_z).

    Raises:
        CircuitSyntaxError: unknown or malformed preset
    """
    kind, _, arg = spec.partition(":")
    if kind == "product":
        return _product_state(arg, Q)
    if kind in ("bell", "theta"):
        if Q != 2:
            raise CircuitSyntaxError(f"state '{kind}' needs 2 qubits, program has {Q}")
        if kind == "bell":
            return family_rho(-math.pi / 4)
        try:
            return family_rho(float(arg))
        except ValueError:
            raise CircuitSyntaxError(f"bad angle '{arg}'")
    if kind == "rho":
        try:
            coeffs = [float(c) for c in arg.split(",")]
        except ValueError:
            raise CircuitSyntaxError(f"bad coefficient list '{arg}'")
        if len(coeffs) != 4 ** Q - 1:
            raise CircuitSyntaxError(f"rho needs {4 ** Q - 1} coefficients for {Q} qubits, got {len(coeffs)}")
        return rho_from_coefficients(Q, coeffs)
    raise CircuitSyntaxError(f"unknown state preset '{spec}'")


def _column(raw: str, token: str, start: int = 0) -> int:
    return raw.find(token, start) + 1


def parse_circuit(text: str) -> CircuitProgram:
    """
    Parse circuit text.

    Grammar: one statement per line, '#' starts a comment. Header lines 'qubits N',
    'map NAME', 'state PRESET', 'output NAME...'; gate lines 'NAME t1 [t2]'.

    Raises:
        CircuitSyntaxError: first error, with 1-based line and column
    """
    header: Dict[str, Any] = {}
    gates: List[GateStatement] = []
    positions: Dict[str, Tuple[int, int]] = {}

    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        tokens = line.split()
        if not tokens:
            continue
        head = tokens[0]
        col = _column(raw, head)

        if head in HEADER_KEYS:
            if head != "output" and head in header:
                raise CircuitSyntaxError(f"duplicate header '{head}'", number, col)
            if gates and head != "output":
                raise CircuitSyntaxError(f"header '{head}' after the first gate", number, col)
            if head == "output":
                names = tokens[1:]
                for name in names:
                    if name not in OUTPUTS:
                        raise CircuitSyntaxError(f"unknown output '{name}'", number, _column(raw, name, col))
                header["output"] = tuple(header.get("output", ())) + tuple(names)
                continue
            if len(tokens) != 2:
                raise CircuitSyntaxError(f"header '{head}' takes exactly one value", number, col)
            value = tokens[1]
            positions[head] = (number, _column(raw, value, col))
            if head == "qubits":
                if not value.isdigit() or not 1 <= int(value) <= 2:
                    raise CircuitSyntaxError(f"qubits must be 1 or 2, got '{value}'", number, positions[head][1])
                header[head] = int(value)
            elif head == "map":
                if value not in MAP_NAMES:
                    raise CircuitSyntaxError(
                        f"unknown map '{value}'; choose from {', '.join(MAP_NAMES)}", number, positions[head][1]
                    )
                header[head] = value
            else:
                header[head] = value
            continue

        if "qubits" not in header:
            raise CircuitSyntaxError("missing 'qubits' header before the first gate", number, col)
        name = head.upper()
        if name not in GATE_NAMES:
            raise CircuitSyntaxError(f"unknown gate '{head}'", number, col)
        arity = gate_arity(name)
        args = tokens[1:]
        if len(args) != arity:
            raise CircuitSyntaxError(f"{name} takes {arity} target(s), got {len(args)}", number, col)
        targets = []
        cursor = col
        for arg in args:
            cursor = _column(raw, arg, cursor)
            if not arg.isdigit() or not 1 <= int(arg) <= header["qubits"]:
                raise CircuitSyntaxError(f"target '{arg}' outside 1..{header['qubits']}", number, cursor)
            targets.append(int(arg))
        if len(set(targets)) != len(targets):
            raise CircuitSyntaxError(f"{name} targets must differ", number, col)
        gates.append(GateStatement(name, tuple(targets), number))

    if "qubits" not in header:
        raise CircuitSyntaxError("missing 'qubits' header", 1, 1)
    Q = header["qubits"]
    map_name = header.get("map", DEFAULT_MAPS[Q])
    state = header.get("state", "product:" + ",".join(["+3"] * Q))
    try:
        load_state(state, Q)
    except CircuitSyntaxError as e:
        line, column = positions.get("state", (1, 1))
        raise CircuitSyntaxError(e.message, line, column)
    except (DimensionMismatchError, ValueError) as e:
        line, column = positions.get("state", (1, 1))
        raise CircuitSyntaxError(f"state is not a density matrix: {str(e)}", line, column)

    outputs = tuple(dict.fromkeys(header.get("output", DEFAULT_OUTPUTS)))
    program = CircuitProgram(Q, map_name, state, tuple(gates), outputs)
    logger.debug(f"Parsed circuit: Q={Q}, map={map_name}, {len(gates)} gates")
    return program


def format_circuit(program: CircuitProgram) -> str:
    lines = [f"qubits {program.qubits}", f"map {program.map_name}", f"state {program.state}"]
    if program.outputs:
        lines.append("output " + " ".join(program.outputs))
    lines.extend(str(statement) for statement in program.gates)
    return "\n".join(lines) + "\n"


def compile_program(program: CircuitProgram) -> List[Tuple[GateStatement, ClassicalOp, GateSpec]]:
    """
    Classical operation and reference gate for every statement.

    Raises:
        DimensionMismatchError: the map is for a different number of qubits
        GateUnavailableError: a gate has no classical realization for the map
    """
    bq_map = make_map(program.map_name)
    if bq_map.Q != program.qubits:
        raise DimensionMismatchError(f"map {bq_map.name} is for {bq_map.Q} qubit(s), program has {program.qubits}")
    compiled = []
    for statement in program.gates:
        try:
            op = gate_realization(statement.name, bq_map, statement.targets)
        except GateUnavailableError as e:
            raise GateUnavailableError(f"line {statement.line}: {str(e)}") from e
        compiled.append((statement, op, gate(statement.name, *statement.targets, Q=program.qubits)))
    return compiled


@dataclass
class RunReport:
    """Per-layer extracted density matrices with their quantum conditions"""

    layers: List[Dict[str, Any]]
    final_fidelity: float
    map_name: str
    labels: Tuple[str, ...] = ()

    @property
    def passed(self) -> bool:
        return all(layer["positive"] for layer in self.layers) and self.final_fidelity <= FIDELITY_TOL

    def to_dict(self) -> Dict[str, Any]:
        return {
            "map": self.map_name,
            "labels": list(self.labels),
            "layers": self.layers,
            "final_fidelity": self.final_fidelity,
            "passed": self.passed,
        }


def compile_and_run(program: CircuitProgram, seed: Optional[int] = None) -> RunReport:
    """
    Realize the initial state classically, apply the compiled operations and read rho back.

    Every layer carries the extracted rho_z, its positivity and purity, and the Frobenius
    distance to the reference evolution rho -> U rho U^dagger.

    Raises:
        QuantumConditionError: the initial state is not positive
        GateUnavailableError: a gate has no classical realization for the map
    """
    compiled = compile_program(program)
    bq_map = make_map(program.map_name)
    rho = load_state(program.state, program.qubits)
    if not positivity_report(rho).positive:
        raise QuantumConditionError("initial state violates the quantum condition")

    dist = sample_quantum_distribution(bq_map, rho, seed)
    reference = rho
    basis = pauli_basis(program.qubits)
    labels = tuple(basis.label_string(z) for z in range(basis.size))
    layers = []
    fidelity = 0.0
    for t in range(len(compiled) + 1):
        if t > 0:
            _, op, spec = compiled[t - 1]
            dist = op.apply(dist)
            reference = apply_unitary(reference, spec)
        extracted = extract_rho(bq_map, dist)
        report = positivity_report(extracted)
        fidelity = float(np.linalg.norm(extracted.matrix - reference.matrix))
        layer: Dict[str, Any] = {"t": t, "gate": str(compiled[t - 1][0]) if t else ""}
        if "rho" in program.outputs:
            layer["rho_z"] = [float(c) for c in extracted.coefficients]
        layer["positive"] = report.positive
        layer["pure"] = report.pure
        if "qcond" in program.outputs:
            layer["purity"] = report.purity
            layer["eigenvalues"] = [float(v) for v in report.eigenvalues]
        if "fidelity" in program.outputs:
            layer["fidelity"] = fidelity
        if "probabilities" in program.outputs:
            layer["p"] = [float(v) for v in dist.p]
        layers.append(layer)
        logger.debug(f"Layer {t}: positive={report.positive}, fidelity={fidelity:.3e}")
    return RunReport(layers, fidelity, bq_map.name, labels)


def _round(value: Any) -> Any:
    if isinstance(value, float):
        return float(f"{value:.15g}")
    if isinstance(value, dict):
        return {key: _round(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_round(item) for item in value]
    return value


def report_json(report: RunReport) -> str:
    return json.dumps(_round(report.to_dict()), sort_keys=True, indent=2) + "\n"


def report_csv(report: RunReport) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["t", "gate", "positive", "pure", "fidelity", *(f"rho_{label}" for label in report.labels)])
    for layer in report.layers:
        writer.writerow([
            layer["t"],
            layer["gate"],
            int(layer["positive"]),
            int(layer["pure"]),
            f"{layer.get('fidelity', float('nan')):.15g}",
            *(f"{c:.15g}" for c in layer.get("rho_z", [])),
        ])
    return buffer.getvalue()


def emit_report(report: RunReport, fmt: str = "json", out_dir: str = ".") -> str:
    """
    Write report.json or report.csv into out_dir and return the path.

    The output is byte-identical for identical runs.
    """
    if fmt not in ("json", "csv"):
        raise ValueError(f"unknown report format '{fmt}', expected json or csv")
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, f"report.{fmt}")
    content = report_json(report) if fmt == "json" else report_csv(report)
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(content)
    logger.debug(f"Wrote {fmt} report to {path}")
    return path
