"""MCP client over a stdio subprocess: JSON-RPC 2.0, one object per line.

Production transport for real toolset servers; tests drive it against a
small echo server. Each connection serializes its in-flight calls.
"""

from __future__ import annotations

import json
import shlex
import subprocess
import threading
from typing import List

from ..errors import TransportFailure, UnknownToolError
from .sandbox import truncate_payload
from .types import SandboxPolicy, ToolResult, ToolSpec

PROTOCOL_VERSION = "2024-11-05"


class StdioToolset:
    """One MCP server connection, handshaken at construction."""

    def __init__(self, toolset_id: str, command: str):
        self.toolset_id = toolset_id
        self._lock = threading.Lock()
        self._next_id = 0
        try:
            self._proc = subprocess.Popen(
                shlex.split(command),
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL,
                text=True,
                bufsize=1,
            )
        except OSError as exc:
            raise TransportFailure(f"cannot spawn {command!r}: {exc}") from exc
        try:
            self._request("initialize", {
                "protocolVersion": PROTOCOL_VERSION,
                "capabilities": {},
                "clientInfo": {"name": "orch", "version": "0.1"},
            })
            self._notify("notifications/initialized", {})
        except TransportFailure:
            self._proc.kill()
            raise

    def _send(self, message: dict) -> None:
        assert self._proc.stdin is not None
        try:
            self._proc.stdin.write(json.dumps(message) + "\n")
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise TransportFailure(f"server pipe closed: {exc}") from exc

    def _notify(self, method: str, params: dict) -> None:
        self._send({"jsonrpc": "2.0", "method": method, "params": params})

    def _request(self, method: str, params: dict) -> dict:
        with self._lock:
            self._next_id += 1
            req_id = self._next_id
            self._send({"jsonrpc": "2.0", "id": req_id, "method": method, "params": params})
            assert self._proc.stdout is not None
            while True:
                line = self._proc.stdout.readline()
                if not line:
                    raise TransportFailure("server closed the connection")
                line = line.strip()
                if not line:
                    continue
                message = json.loads(line)
                if message.get("id") != req_id:
                    continue  # notification or stale reply
                if "error" in message:
                    raise TransportFailure(f"{method} failed: {message['error']}")
                return message.get("result", {})

    def list_tools(self) -> List[ToolSpec]:
        result = self._request("tools/list", {})
        specs = [
            ToolSpec(
                toolset_id=self.toolset_id,
                name=t["name"],
                description=t.get("description", ""),
                schema=t.get("inputSchema", {"type": "object"}),
            )
            for t in result.get("tools", [])
        ]
        return sorted(specs, key=lambda s: s.name)

    def invoke(self, tool: str, arguments: dict, policy: SandboxPolicy) -> ToolResult:
        names = {s.name for s in self.list_tools()}
        if tool not in names:
            raise UnknownToolError(f"{self.toolset_id} has no tool {tool!r}")
        import time

        start = time.monotonic()
        result = self._request("tools/call", {"name": tool, "arguments": arguments})
        elapsed_ms = int((time.monotonic() - start) * 1000)
        parts = [c.get("text", "") for c in result.get("content", []) if c.get("type") == "text"]
        payload, truncated = truncate_payload("\n".join(parts), policy)
        status = "error" if result.get("isError") else "ok"
        return ToolResult(status=status, payload=payload, truncated=truncated, elapsed_ms=elapsed_ms)

    def close(self) -> None:
        if self._proc.poll() is None:
            self._proc.terminate()
            try:
                self._proc.wait(timeout=2)
            except subprocess.TimeoutExpired:
                self._proc.kill()
