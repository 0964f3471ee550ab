"""
Centralized tools module with @tool decorators for smolagents
"""

try:
    from smolagents import tool
except ImportError:
    def tool(func):
        return func

from .utils.base import SimResult, _run_coroutine
from .utils.simulator import (
    CircuitTool as _CircuitTool,
    ContinuousTool as _ContinuousTool,
    SpectrumTool as _SpectrumTool,
    VerifyTool as _VerifyTool,
)


def _render(result: SimResult) -> str:
    if result.success:
        return result.output or "Completed successfully"
    return f"Error: {result.error}" + (f"\nOUTPUT: {result.output}" if result.output else "")


@tool
def run_circuit_tool(action: str, circuit_text: str = None, circuit_file: str = None, seed: int = None,
                     report_format: str = "json", out_dir: str = None) -> str:
    """
    Run a quantum circuit on its classical Ising-spin realization.

    Args:
        action: Action to perform (run, parse, catalog)
        circuit_text: Circuit source with qubits/map/state/output headers and one gate per line
        circuit_file: Path of a circuit file, used when circuit_text is empty
        seed: Seed for sampled classical preimages
        report_format: Report format, json or csv (default: json)
        out_dir: Directory to write the report file into

    Returns:
        Report text or error message
    """
    return _render(_run_coroutine(_CircuitTool().execute(
        action=action, circuit_text=circuit_text, circuit_file=circuit_file, seed=seed,
        report_format=report_format, out_dir=out_dir,
    )))


@tool
def verify_preset_tool(action: str, preset: str = None, seed: int = None) -> str:
    """
    Run a verification preset and return its pass/fail table.

    Args:
        action: Action to perform (run, list)
        preset: Preset name, e.g. cnot, chsh, no-go or acceptance
        seed: Seed for randomized checks

    Returns:
        Check table or error message
    """
    return _render(_run_coroutine(_VerifyTool().execute(action=action, preset=preset, seed=seed)))


@tool
def spectrum_tool(action: str, chain_text: str = None, chain_file: str = None, step_name: str = None,
                  params: str = None) -> str:
    """
    Spectrum and periods of step evolution operators.

    Args:
        action: Action to perform (chain, step)
        chain_text: Chain file content
        chain_file: Path of a chain file
        step_name: Step preset name for the step action
        params: JSON object of step parameters

    Returns:
        JSON spectrum reports or error message
    """
    return _render(_run_coroutine(_SpectrumTool().execute(
        action=action, chain_text=chain_text, chain_file=chain_file, step_name=step_name, params=params,
    )))


@tool
def continuous_tool(action: str, kind: str = "quadrature", directions: int = 20, n_samples: int = 100000,
                    shards: int = 1, seed: int = None, rho: str = None, x_bar: str = None) -> str:
    """
    Expectation values of continuous-variable qubit models.

    Args:
        action: Action to perform (experiment, pure_width)
        kind: Experiment (quadrature, montecarlo, gaussian, circle)
        directions: Number of directions on the grid (default: 20)
        n_samples: Monte Carlo sample count (default: 100000)
        shards: Parallel Monte Carlo shards (default: 1)
        seed: Monte Carlo seed
        rho: Comma-separated Bloch vector of the rotation-invariant model
        x_bar: Comma-separated Gaussian center for pure_width

    Returns:
        CSV rows or error message
    """
    return _render(_run_coroutine(_ContinuousTool().execute(
        action=action, kind=kind, directions=directions, n_samples=n_samples, shards=shards, seed=seed,
        rho=rho, x_bar=x_bar,
    )))


CircuitTool = _CircuitTool
VerifyTool = _VerifyTool
SpectrumTool = _SpectrumTool
ContinuousTool = _ContinuousTool
