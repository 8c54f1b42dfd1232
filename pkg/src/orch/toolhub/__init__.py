from .builtin import BuiltinToolset, filesystem_toolset
from .mock_apps import BUILTIN_FACTORIES, monday_toolset, notion_toolset
from .registry import ToolRegistry
from .sandbox import TRUNCATION_MARKER, resolve_path, run_confined
from .types import (
    SandboxPolicy,
    ToolResult,
    ToolSpec,
    ToolsetConfig,
    ValidationReport,
    validate_arguments,
)

__all__ = [
    "BuiltinToolset",
    "BUILTIN_FACTORIES",
    "SandboxPolicy",
    "ToolRegistry",
    "ToolResult",
    "ToolSpec",
    "ToolsetConfig",
    "TRUNCATION_MARKER",
    "ValidationReport",
    "filesystem_toolset",
    "monday_toolset",
    "notion_toolset",
    "resolve_path",
    "run_confined",
    "validate_arguments",
]
