"""
Simulator tools for smolagents: circuits, verification presets, step spectra and
continuous-variable experiments
"""

import json
import logging
from typing import Any, Dict, Optional

import numpy as np

from .base import AsyncSimTool, CircuitSyntaxError, SimResult, SimulationError
from .bitq_maps import MAP_NAMES
from .chain_engine import step_preset
from .circuit import compile_and_run, emit_report, format_circuit, parse_circuit, report_csv, report_json
from .continuous import continuous_csv_rows, rows_to_csv, solve_width_for_pure
from .presets import PRESETS, parse_chain_file, render_table, run_preset, spectrum_reports
from .quantum_core import GATE_NAMES

logger = logging.getLogger(__name__)

CONTINUOUS_KINDS = ("quadrature", "montecarlo", "gaussian", "circle")


def _read_source(text: Optional[str], path: Optional[str]) -> Optional[str]:
    if text:
        return text
    if path:
        with open(path, "r", encoding="utf-8") as handle:
            return handle.read()
    return None


def _error(action: str, e: Exception) -> SimResult:
    logger.error(f"{action} error: {str(e)}")
    return SimResult(error=f"{action} failed: {str(e)}", success=False)


class CircuitTool(AsyncSimTool):
    """
    Run quantum circuits through their classical bit-quantum realization
    """

    def __init__(self):
        self.name = "ising_circuit"
        self.description = """Run a quantum circuit on a classical Ising-spin realization and report the extracted density matrices, their quantum conditions and the distance to the exact quantum evolution."""

        self.inputs = {
            "action": {
                "type": "string",
                "description": "Action to perform: run, parse, catalog",
                "required": True
            },
            "circuit_text": {
                "type": "string",
                "description": "Circuit source: header lines (qubits, map, state, output) then one gate per line",
                "required": False
            },
            "circuit_file": {
                "type": "string",
                "description": "Path of a circuit file, used when circuit_text is empty",
                "required": False
            },
            "seed": {
                "type": "integer",
                "description": "Seed for sampled classical preimages",
                "required": False
            },
            "report_format": {
                "type": "string",
                "description": "Report format: json or csv",
                "default": "json",
                "required": False
            },
            "out_dir": {
                "type": "string",
                "description": "Directory to write report.json or report.csv into (optional)",
                "required": False
            }
        }
        self.output_type = "string"
        super().__init__()

    def _run(self, text: str, seed: Optional[int], report_format: str, out_dir: Optional[str]) -> SimResult:
        try:
            program = parse_circuit(text)
            report = compile_and_run(program, seed)
        except CircuitSyntaxError as e:
            return SimResult(error=f"Syntax error at line {e.line}, column {e.column}: {e.message}",
                             success=False, artifacts={"line": e.line, "column": e.column})
        except SimulationError as e:
            return _error("Circuit run", e)

        rendered = report_csv(report) if report_format == "csv" else report_json(report)
        artifacts: Dict[str, Any] = {"report": report.to_dict(), "passed": report.passed}
        if out_dir:
            artifacts["path"] = emit_report(report, report_format, out_dir)
        return SimResult(output=rendered, success=report.passed,
                         error="" if report.passed else "quantum condition or fidelity check failed",
                         artifacts=artifacts)

    def _parse(self, text: str) -> SimResult:
        try:
            program = parse_circuit(text)
        except CircuitSyntaxError as e:
            return SimResult(error=f"Syntax error at line {e.line}, column {e.column}: {e.message}",
                             success=False, artifacts={"line": e.line, "column": e.column})
        return SimResult(output=format_circuit(program), artifacts={"gates": len(program.gates)})

    def _catalog(self) -> SimResult:
        output = f"Maps: {', '.join(MAP_NAMES)}\nGates: {', '.join(GATE_NAMES)}\n"
        return SimResult(output=output, artifacts={"maps": list(MAP_NAMES), "gates": list(GATE_NAMES)})

    async def execute(self, action: str, circuit_text: str = None, circuit_file: str = None,
                      seed: int = None, report_format: str = "json", out_dir: str = None,
                      **kwargs) -> SimResult:
        """
        Execute circuit action.

        Args:
            action (str): run, parse or catalog
            circuit_text (str): Circuit source
            circuit_file (str): Circuit file path
            seed (int): Sampling seed
            report_format (str): json or csv
            out_dir (str): Report directory

        Returns:
            SimResult: Rendered report; success is False when a layer fails a check
        """
        try:
            if action == "catalog":
                return self._catalog()

            text = _read_source(circuit_text, circuit_file)
            if action == "run":
                if not text:
                    return SimResult(error="circuit_text or circuit_file is required for run action", success=False)
                if report_format not in ("json", "csv"):
                    return SimResult(error=f"Unknown report_format: {report_format}", success=False)
                return await self.run_blocking(self._run, text, seed, report_format, out_dir)

            elif action == "parse":
                if not text:
                    return SimResult(error="circuit_text or circuit_file is required for parse action", success=False)
                return self._parse(text)

            else:
                return SimResult(error=f"Unknown action: {action}. Available actions: run, parse, catalog",
                                 success=False)
        except OSError as e:
            return _error("Circuit file", e)


class VerifyTool(AsyncSimTool):
    """
    Reproduce the worked examples and no-go checks
    """

    def __init__(self):
        self.name = "ising_verify"
        self.description = """Run a verification preset (hadamard, cnot, entangled, spectra, preparation, t-gate, chsh, pairs, no-go, counterexamples, continuous, acceptance) and report a pass/fail table."""

        self.inputs = {
            "action": {
                "type": "string",
                "description": "Action to perform: run, list",
                "required": True
            },
            "preset": {
                "type": "string",
                "description": "Preset name (required for run)",
                "required": False
            },
            "seed": {
                "type": "integer",
                "description": "Seed for randomized checks",
                "required": False
            }
        }
        self.output_type = "string"
        super().__init__()

    async def execute(self, action: str, preset: str = None, seed: int = None, **kwargs) -> SimResult:
        if action == "list":
            return SimResult(output="\n".join(PRESETS) + "\n", artifacts={"presets": list(PRESETS)})
        if action != "run":
            return SimResult(error=f"Unknown action: {action}. Available actions: run, list", success=False)
        if not preset:
            return SimResult(error="preset is required for run action", success=False)
        if preset not in PRESETS:
            return SimResult(error=f"Unknown preset: {preset}. Available presets: {', '.join(PRESETS)}",
                             success=False)

        results = await self.run_blocking(run_preset, preset, seed)
        failed = [r.name for r in results if not r.passed]
        return SimResult(
            output=render_table(results),
            error=f"{len(failed)} checks failed: {', '.join(failed)}" if failed else "",
            success=not failed,
            artifacts={"results": [r.to_dict() for r in results]},
        )


class SpectrumTool(AsyncSimTool):
    """
    Spectra, periods and representations of step evolution operators
    """

    def __init__(self):
        self.name = "ising_spectrum"
        self.description = """Compute eigenvalues, periods and the subleading modulus of step evolution operators from a chain file or a named step preset."""

        self.inputs = {
            "action": {
                "type": "string",
                "description": "Action to perform: chain, step",
                "required": True
            },
            "chain_text": {
                "type": "string",
                "description": "Chain file content: 'step NAME key=value' lines or 'matrix' blocks",
                "required": False
            },
            "chain_file": {
                "type": "string",
                "description": "Path of a chain file, used when chain_text is empty",
                "required": False
            },
            "step_name": {
                "type": "string",
                "description": "Step preset for the step action (sp, projector, attractor, s(u), hadamard_coupling, swap_coupling, frustrated)",
                "required": False
            },
            "params": {
                "type": "string",
                "description": "JSON object of step parameters, e.g. {\"u\": 0.3}",
                "required": False
            }
        }
        self.output_type = "string"
        super().__init__()

    async def execute(self, action: str, chain_text: str = None, chain_file: str = None,
                      step_name: str = None, params: str = None, **kwargs) -> SimResult:
        try:
            if action == "chain":
                text = _read_source(chain_text, chain_file)
                if not text:
                    return SimResult(error="chain_text or chain_file is required for chain action", success=False)
                steps = parse_chain_file(text)
            elif action == "step":
                if not step_name:
                    return SimResult(error="step_name is required for step action", success=False)
                steps = [step_preset(step_name, **json.loads(params or "{}"))]
            else:
                return SimResult(error=f"Unknown action: {action}. Available actions: chain, step", success=False)
        except CircuitSyntaxError as e:
            return SimResult(error=f"Syntax error at line {e.line}, column {e.column}: {e.message}",
                             success=False, artifacts={"line": e.line, "column": e.column})
        except (SimulationError, KeyError, ValueError, OSError) as e:
            return _error("Spectrum", e)

        reports = await self.run_blocking(spectrum_reports, steps)
        return SimResult(output=json.dumps(reports, indent=2, sort_keys=True) + "\n", artifacts={"steps": reports})


class ContinuousTool(AsyncSimTool):
    """
    Expectation values of qubits realized by continuous classical variables
    """

    def __init__(self):
        self.name = "ising_continuous"
        self.description = """Evaluate continuous-variable qubit models over a grid of directions (quadrature, montecarlo, gaussian, circle) or solve the width of a pure Gaussian state."""

        self.inputs = {
            "action": {
                "type": "string",
                "description": "Action to perform: experiment, pure_width",
                "required": True
            },
            "kind": {
                "type": "string",
                "description": "Experiment: quadrature, montecarlo, gaussian, circle",
                "default": "quadrature",
                "required": False
            },
            "directions": {
                "type": "integer",
                "description": "Number of directions on the evaluation grid",
                "default": 20,
                "required": False
            },
            "n_samples": {
                "type": "integer",
                "description": "Monte Carlo sample count",
                "default": 100000,
                "required": False
            },
            "shards": {
                "type": "integer",
                "description": "Parallel Monte Carlo shards",
                "default": 1,
                "required": False
            },
            "seed": {
                "type": "integer",
                "description": "Monte Carlo seed",
                "required": False
            },
            "rho": {
                "type": "string",
                "description": "Comma-separated Bloch vector for the rotation-invariant model (default 0,0,1)",
                "required": False
            },
            "x_bar": {
                "type": "string",
                "description": "Comma-separated Gaussian center (required for pure_width)",
                "required": False
            }
        }
        self.output_type = "string"
        super().__init__()

    async def execute(self, action: str, kind: str = "quadrature", directions: int = 20,
                      n_samples: int = 100000, shards: int = 1, seed: int = None, rho: str = None,
                      x_bar: str = None, **kwargs) -> SimResult:
        try:
            if action == "experiment":
                if kind not in CONTINUOUS_KINDS:
                    return SimResult(error=f"Unknown kind: {kind}. Available kinds: {', '.join(CONTINUOUS_KINDS)}",
                                     success=False)
                bloch = np.array([float(v) for v in rho.split(",")]) if rho else (0.0, 0.0, 1.0)
                rows = await self.run_blocking(
                    continuous_csv_rows, kind, directions=directions, rho=bloch, n_samples=n_samples,
                    seed=seed, shards=shards,
                )
                return SimResult(output=rows_to_csv(rows), artifacts={"rows": rows})

            elif action == "pure_width":
                if not x_bar:
                    return SimResult(error="x_bar is required for pure_width action", success=False)
                center = np.array([float(v) for v in x_bar.split(",")])
                width = solve_width_for_pure(center)
                return SimResult(output=f"a = {width:.12g}\n", artifacts={"a": width})

            else:
                return SimResult(error=f"Unknown action: {action}. Available actions: experiment, pure_width",
                                 success=False)
        except (SimulationError, ValueError) as e:
            return _error("Continuous", e)
