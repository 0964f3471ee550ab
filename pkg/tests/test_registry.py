from ising_qubits import (
    AVAILABLE_TOOLS,
    TOOL_CATEGORIES,
    create_tool,
    create_tool_suite,
    get_tool,
    get_tool_info,
    list_tools,
)


def test_tool_registry():
    """Test that the tool registry is properly populated"""
    assert len(AVAILABLE_TOOLS) == 4
    for tool_name in ["run_circuit_tool", "verify_preset_tool", "spectrum_tool", "continuous_tool"]:
        assert tool_name in AVAILABLE_TOOLS


def test_get_tool():
    """Test getting tool classes by name"""
    assert get_tool("run_circuit_tool").__name__ == "CircuitTool"
    assert get_tool("non_existent_tool") is None


def test_create_tool():
    """Test creating tool instances"""
    tool = create_tool("verify_preset_tool")
    assert tool is not None
    assert tool.name == "ising_verify"
    assert hasattr(tool, "forward")
    assert create_tool("non_existent_tool") is None


def test_list_tools():
    """Test listing tools"""
    assert len(list_tools()) == 4
    assert list_tools("chains") == ["spectrum_tool"]
    assert list_tools("unknown") == []


def test_get_tool_info():
    """Test getting tool information"""
    info = get_tool_info("continuous_tool")
    assert info["name"] == "ising_continuous"
    assert "action" in info["inputs"]
    assert info["output_type"] == "string"
    assert info["class"] == "ContinuousTool"
    assert get_tool_info("non_existent_tool") is None


def test_optional_inputs_are_nullable():
    """Test that every optional input is marked nullable for smolagents"""
    for tool in create_tool_suite():
        for input_name, input_def in tool.inputs.items():
            if not input_def.get("required", False):
                assert input_def.get("nullable"), f"{tool.name}.{input_name}"


def test_create_tool_suite():
    """Test creating the full suite and a subset"""
    tools = create_tool_suite()
    assert len(tools) == 4
    for tool in tools:
        assert hasattr(tool, "forward")
        assert hasattr(tool, "name")
        assert hasattr(tool, "description")
    assert len(create_tool_suite(["spectrum_tool", "missing"])) == 1


def test_tool_categories():
    """Test tool categories structure"""
    for category in ("circuits", "verification", "chains", "continuous"):
        assert category in TOOL_CATEGORIES
    for tools in TOOL_CATEGORIES.values():
        for tool_name in tools:
            assert tool_name in AVAILABLE_TOOLS
