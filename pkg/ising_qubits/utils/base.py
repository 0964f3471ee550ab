"""
Base classes, errors and settings shared by the ising-qubits tools
"""

import asyncio
import concurrent.futures
import inspect
import os
import types
from typing import Any, Dict, Optional

from smolagents import Tool


def _env_int(name: str, default: int) -> int:
    value = os.environ.get(name)
    if value is None or not value.strip():
        return default
    try:
        return int(value)
    except ValueError:
        return default


# Dense state spaces hold 2**M entries; 20 is the hard ceiling.
MAX_SPINS_LIMIT = 20
MAX_SPINS = max(1, min(_env_int("ISING_QUBITS_MAX_SPINS", 16), MAX_SPINS_LIMIT))

PROB_TOL = 1e-12
RENORM_TOL = 1e-9
POSITIVITY_TOL = 1e-10
CLOSURE_TOL = 1e-9
DEFAULT_SEED = _env_int("ISING_QUBITS_SEED", 0)


class SimulationError(Exception):
    """Base class for all ising-qubits errors"""


class InvalidDistributionError(SimulationError, ValueError):
    """Probability data violates nonnegativity or normalization"""


class DimensionMismatchError(SimulationError, ValueError):
    """Spin count, qubit count or matrix shape does not match"""


class QuantumConditionError(SimulationError, ValueError):
    """A density matrix fails a quantum condition an operation requires"""


class GateUnavailableError(SimulationError):
    """A gate has no classical realization for the requested map"""


class ConstructionNotFoundError(SimulationError):
    """No supported classical preimage exists for a quantum state"""


class NonBijectiveRuleError(SimulationError, ValueError):
    """A spin transformation rule does not permute configurations"""


class SingularStepError(SimulationError):
    """A step evolution operator is not invertible"""


class CircuitSyntaxError(SimulationError):
    """Circuit text could not be parsed"""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.message = message
        self.line = line
        self.column = column
        super().__init__(f"line {line}, col {column}: {message}")


def check_spin_count(M: int) -> int:
    """Validate a dense spin count against the configured limit."""
    if M < 1:
        raise DimensionMismatchError(f"spin count must be at least 1, got {M}")
    if M > MAX_SPINS:
        raise DimensionMismatchError(
            f"spin count {M} exceeds MAX_SPINS={MAX_SPINS} (set ISING_QUBITS_MAX_SPINS, at most {MAX_SPINS_LIMIT})"
        )
    return M


class SimResult:
    """
    Outcome of a simulator tool call: text output for agents plus structured artifacts
    """

    def __init__(self, output: str = "", error: str = "", success: bool = True,
                 artifacts: Optional[Dict[str, Any]] = None):
        self.output = output
        self.error = error
        self.success = success
        self.artifacts = artifacts or {}

    def __str__(self):
        return self.output if self.success else f"Error: {self.error}"

    def __repr__(self):
        return f"SimResult(success={self.success}, output='{self.output[:50]}...', error='{self.error}')"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "output": self.output,
            "error": self.error,
            "success": self.success,
            "artifacts": self.artifacts,
        }


def _run_coroutine(coro):
    """Run a coroutine to completion from sync code, even inside a running loop."""
    try:
        asyncio.get_running_loop()
    except RuntimeError:
        return asyncio.run(coro)
    with concurrent.futures.ThreadPoolExecutor(max_workers=1) as executor:
        return executor.submit(asyncio.run, coro).result()


class SimTool(Tool):
    """
    smolagents Tool whose forward() signature is derived from self.inputs
    and which delegates to an async execute() returning SimResult
    """

    def __init__(self):
        if not getattr(self, "name", None):
            self.name = self.__class__.__name__.lower().replace("tool", "")
        if not getattr(self, "description", None):
            self.description = f"Tool for {self.name}"
        if not getattr(self, "inputs", None):
            self.inputs = {}
        if not getattr(self, "output_type", None):
            self.output_type = "string"

        super().__init__()

        for input_def in self.inputs.values():
            # smolagents requires optional inputs to be nullable
            if not input_def.get("required", False):
                input_def["nullable"] = True

        self.forward = types.MethodType(self._build_forward(), self)

    def _build_forward(self):
        parameters = [inspect.Parameter("self", inspect.Parameter.POSITIONAL_OR_KEYWORD)]
        for input_name, input_def in self.inputs.items():
            default = inspect.Parameter.empty if input_def.get("required", False) else input_def.get("default")
            parameters.append(
                inspect.Parameter(input_name, inspect.Parameter.POSITIONAL_OR_KEYWORD, default=default)
            )
        signature = inspect.Signature(parameters)

        def forward(*args, **kwargs):
            bound = signature.bind(*args, **kwargs)
            bound.apply_defaults()
            tool = bound.arguments.pop("self")
            return tool._execute_sync(**bound.arguments)

        forward.__signature__ = signature
        forward.__doc__ = self.description
        return forward

    def _execute_sync(self, **kwargs) -> str:
        try:
            result = _run_coroutine(self.execute(**kwargs))
        except Exception as e:
            return f"Error executing tool: {str(e)}"
        return str(result)

    async def execute(self, **kwargs) -> SimResult:
        raise NotImplementedError("Subclasses must implement execute method")


class AsyncSimTool(SimTool):
    """SimTool whose execute() runs compute-heavy work off the event loop."""

    async def run_blocking(self, func, *args, **kwargs):
        loop = asyncio.get_running_loop()
        return await loop.run_in_executor(None, lambda: func(*args, **kwargs))

    async def execute(self, **kwargs) -> SimResult:
        raise NotImplementedError("Subclasses must implement execute method")

