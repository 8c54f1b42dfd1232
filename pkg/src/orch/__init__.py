"""Local agent orchestration: hierarchical toolset routing, decoupled tool
selection and argument generation adapters, mask-annotated dataset
extraction, and coverage-based trajectory judging."""

from .adapters import AdapterCache, AdapterId, AdapterResolver
from .gateway import (
    Completion,
    CompletionRequest,
    Constraint,
    Gateway,
    Message,
    OpenAIBackend,
    ScriptedBackend,
)
from .orchestrator import Session, SessionConfig, Step, Trajectory
from .toolhub import SandboxPolicy, ToolRegistry, ToolResult, ToolSpec, ToolsetConfig

__version__ = "0.1.0"

__all__ = [
    "AdapterCache",
    "AdapterId",
    "AdapterResolver",
    "Completion",
    "CompletionRequest",
    "Constraint",
    "Gateway",
    "Message",
    "OpenAIBackend",
    "SandboxPolicy",
    "ScriptedBackend",
    "Session",
    "SessionConfig",
    "Step",
    "ToolRegistry",
    "ToolResult",
    "ToolSpec",
    "ToolsetConfig",
    "Trajectory",
    "__version__",
]
