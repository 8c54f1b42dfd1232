import sys
import textwrap

import pytest

from orch.errors import TransportFailure, UnknownToolError
from orch.toolhub import SandboxPolicy, ToolRegistry, ToolsetConfig

SERVER_SOURCE = textwrap.dedent("""
    import json, sys

    TOOLS = [
        {"name": "echo", "description": "Echo the message back.",
         "inputSchema": {"type": "object", "properties": {"message": {"type": "string"}},
                          "required": ["message"], "additionalProperties": False}},
        {"name": "add", "description": "Add two integers.",
         "inputSchema": {"type": "object",
                          "properties": {"a": {"type": "integer"}, "b": {"type": "integer"}},
                          "required": ["a", "b"], "additionalProperties": False}},
    ]

    for line in sys.stdin:
        msg = json.loads(line)
        method = msg.get("method")
        if "id" not in msg:
            continue
        if method == "initialize":
            result = {"protocolVersion": "2024-11-05", "capabilities": {"tools": {}},
                      "serverInfo": {"name": "echo-server", "version": "0"}}
        elif method == "tools/list":
            result = {"tools": TOOLS}
        elif method == "tools/call":
            name = msg["params"]["name"]
            args = msg["params"]["arguments"]
            if name == "echo":
                text = args["message"]
            else:
                text = str(args["a"] + args["b"])
            result = {"content": [{"type": "text", "text": text}], "isError": False}
        else:
            print(json.dumps({"jsonrpc": "2.0", "id": msg["id"],
                              "error": {"code": -32601, "message": "no such method"}}), flush=True)
            continue
        print(json.dumps({"jsonrpc": "2.0", "id": msg["id"], "result": result}), flush=True)
""")


@pytest.fixture
def echo_registry(tmp_path):
    server = tmp_path / "echo_server.py"
    server.write_text(SERVER_SOURCE)
    registry = ToolRegistry()
    registry.register_toolset(ToolsetConfig(
        toolset_id="echo", transport="stdio-subprocess",
        command=f"{sys.executable} {server}",
        sandbox=SandboxPolicy(timeout_ms=5000)))
    yield registry
    registry.close()


def test_handshake_and_list_tools(echo_registry):
    specs = echo_registry.list_tools("echo")
    assert [s.name for s in specs] == ["add", "echo"]
    assert specs[1].description == "Echo the message back."


def test_tools_call_roundtrip(echo_registry):
    result = echo_registry.invoke("echo", "echo", {"message": "hi there"})
    assert result.status == "ok"
    assert result.payload == "hi there"
    result = echo_registry.invoke("echo", "add", {"a": 2, "b": 3})
    assert result.payload == "5"


def test_unknown_tool_on_stdio(echo_registry):
    with pytest.raises(UnknownToolError):
        echo_registry.invoke("echo", "missing", {})


def test_spawn_failure():
    registry = ToolRegistry()
    with pytest.raises(TransportFailure):
        registry.register_toolset(ToolsetConfig(
            toolset_id="broken", transport="stdio-subprocess",
            command="/no/such/binary", sandbox=SandboxPolicy(timeout_ms=1000)))


def test_server_that_dies_mid_call(tmp_path):
    server = tmp_path / "dying.py"
    server.write_text(
        "import json,sys\n"
        "line=sys.stdin.readline()\n"
        "msg=json.loads(line)\n"
        "print(json.dumps({'jsonrpc':'2.0','id':msg['id'],'result':{}}), flush=True)\n"
        "sys.stdin.readline()  # swallow the initialized notification, then exit\n"
    )
    registry = ToolRegistry()
    registry.register_toolset(ToolsetConfig(
        toolset_id="dying", transport="stdio-subprocess",
        command=f"{sys.executable} {server}",
        sandbox=SandboxPolicy(timeout_ms=2000)))
    with pytest.raises(TransportFailure):
        registry.list_tools("dying")
    registry.close()
