"""
Ising Qubits - quantum bits realized by classical Ising spins, packaged as smolagents tools

Quantum circuits run on probability distributions over spin configurations; the extracted
density matrices are checked against the quantum conditions and the exact evolution.
"""

from .utils.base import AsyncSimTool, SimResult, SimTool, SimulationError
from .tools import (
    CircuitTool,
    ContinuousTool,
    SpectrumTool,
    VerifyTool,
    continuous_tool,
    run_circuit_tool,
    spectrum_tool,
    verify_preset_tool,
)

__version__ = "0.1.0"

AVAILABLE_TOOLS = {
    "run_circuit_tool": CircuitTool,
    "verify_preset_tool": VerifyTool,
    "spectrum_tool": SpectrumTool,
    "continuous_tool": ContinuousTool,
}

TOOL_CATEGORIES = {
    "circuits": ["run_circuit_tool"],
    "verification": ["verify_preset_tool"],
    "chains": ["spectrum_tool"],
    "continuous": ["continuous_tool"],
}


def get_tool(tool_name: str):
    """
    Get a tool class by name.

    Args:
        tool_name (str): Name of the tool to get

    Returns:
        Tool class or None if not found
    """
    return AVAILABLE_TOOLS.get(tool_name)


def create_tool(tool_name: str):
    tool_class = get_tool(tool_name)
    if tool_class:
        return tool_class()
    return None


def list_tools(category: str = None):
    """List available tools, optionally filtered by category."""
    if category:
        return TOOL_CATEGORIES.get(category, [])
    return list(AVAILABLE_TOOLS.keys())


def get_tool_info(tool_name: str):
    tool_class = get_tool(tool_name)
    if not tool_class:
        return None
    tool = tool_class()
    return {
        "name": tool.name,
        "description": tool.description,
        "inputs": tool.inputs,
        "output_type": tool.output_type,
        "class": tool_class.__name__,
        "module": tool_class.__module__,
    }


def create_tool_suite(tool_names: list = None):
    """Create tool instances for use in smolagents; all tools when tool_names is None."""
    if tool_names is None:
        tool_names = list(AVAILABLE_TOOLS.keys())
    return [tool for tool in (create_tool(name) for name in tool_names) if tool]


__all__ = [
    "AsyncSimTool",
    "SimTool",
    "SimResult",
    "SimulationError",
    "CircuitTool",
    "VerifyTool",
    "SpectrumTool",
    "ContinuousTool",
    "run_circuit_tool",
    "verify_preset_tool",
    "spectrum_tool",
    "continuous_tool",
    "get_tool",
    "create_tool",
    "list_tools",
    "get_tool_info",
    "create_tool_suite",
    "AVAILABLE_TOOLS",
    "TOOL_CATEGORIES",
]
