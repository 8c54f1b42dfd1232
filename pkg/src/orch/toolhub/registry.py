"""Toolset registry: discovery, validation and confined invocation."""

from __future__ import annotations

import threading
from typing import Dict, List, Optional

from ..errors import (
    ArgumentValidationError,
    DuplicateToolsetError,
    UnknownToolError,
    UnknownToolsetError,
)
from .mcp_stdio import StdioToolset
from .mock_apps import BUILTIN_FACTORIES
from .types import SandboxPolicy, ToolResult, ToolSpec, ToolsetConfig, validate_arguments


class ToolRegistry:
    """Registered toolsets keyed by id; safe for concurrent readers."""

    def __init__(self):
        self._lock = threading.Lock()
        self._toolsets: Dict[str, object] = {}
        self._configs: Dict[str, ToolsetConfig] = {}

    def register_toolset(self, config: ToolsetConfig):
        with self._lock:
            if config.toolset_id in self._toolsets:
                raise DuplicateToolsetError(f"toolset {config.toolset_id!r} already registered")
        if config.transport == "builtin":
            factory = BUILTIN_FACTORIES.get(config.builtin or config.toolset_id)
            if factory is None:
                raise UnknownToolsetError(f"no builtin toolset factory {config.builtin!r}")
            handle = factory(config.toolset_id)
        elif config.transport == "stdio-subprocess":
            handle = StdioToolset(config.toolset_id, config.command)
        else:
            raise ValueError(f"unknown transport {config.transport!r}")
        with self._lock:
            if config.toolset_id in self._toolsets:
                raise DuplicateToolsetError(f"toolset {config.toolset_id!r} already registered")
            self._toolsets[config.toolset_id] = handle
            self._configs[config.toolset_id] = config
        return handle

    def register_handle(self, handle, sandbox: Optional[SandboxPolicy] = None) -> None:
        """Register a pre-built toolset object (used for custom mocks in tests)."""
        with self._lock:
            if handle.toolset_id in self._toolsets:
                raise DuplicateToolsetError(f"toolset {handle.toolset_id!r} already registered")
            self._toolsets[handle.toolset_id] = handle
            self._configs[handle.toolset_id] = ToolsetConfig(
                toolset_id=handle.toolset_id,
                transport="builtin",
                sandbox=sandbox or SandboxPolicy(),
            )

    def toolset_ids(self) -> List[str]:
        with self._lock:
            return sorted(self._toolsets)

    def policy(self, toolset_id: str) -> SandboxPolicy:
        return self._config(toolset_id).sandbox

    def _config(self, toolset_id: str) -> ToolsetConfig:
        with self._lock:
            if toolset_id not in self._configs:
                raise UnknownToolsetError(f"unknown toolset {toolset_id!r}")
            return self._configs[toolset_id]

    def _handle(self, toolset_id: str):
        with self._lock:
            if toolset_id not in self._toolsets:
                raise UnknownToolsetError(f"unknown toolset {toolset_id!r}")
            return self._toolsets[toolset_id]

    def list_tools(self, toolset_id: str) -> List[ToolSpec]:
        return sorted(self._handle(toolset_id).list_tools(), key=lambda s: s.name)

    def get_tool(self, toolset_id: str, tool: str) -> ToolSpec:
        for spec in self.list_tools(toolset_id):
            if spec.name == tool:
                return spec
        raise UnknownToolError(f"{toolset_id} has no tool {tool!r}")

    def invoke(
        self,
        toolset_id: str,
        tool: str,
        arguments: dict,
        policy: Optional[SandboxPolicy] = None,
    ) -> ToolResult:
        handle = self._handle(toolset_id)
        if policy is None:
            policy = self.policy(toolset_id)
        report = validate_arguments(self.get_tool(toolset_id, tool), arguments)
        if not report.ok:
            raise ArgumentValidationError("; ".join(report.violations))
        return handle.invoke(tool, arguments, policy)

    def close(self) -> None:
        with self._lock:
            handles = list(self._toolsets.values())
        for handle in handles:
            handle.close()
