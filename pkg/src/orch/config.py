"""TOML application config with ORCH_-prefixed environment overrides."""

from __future__ import annotations

import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import List

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .gateway import Gateway, OpenAIBackend, ScriptedBackend
from .orchestrator import SessionConfig
from .toolhub.registry import ToolRegistry
from .toolhub.types import SandboxPolicy, ToolsetConfig


@dataclass
class AppConfig:
    toolsets: List[ToolsetConfig]
    backend: str = "mock:"  # URL or "mock:<script path>"
    adapter_manifest: str = "adapters.json"
    session: SessionConfig = field(default_factory=SessionConfig)

    def __post_init__(self):
        if not self.toolsets:
            raise ValueError("at least one toolset must be configured")


_ENV_OVERRIDES = {
    "ORCH_BACKEND": ("backend", str),
    "ORCH_ADAPTER_MANIFEST": ("adapter_manifest", str),
    "ORCH_MAX_STEPS": ("session.max_steps", int),
    "ORCH_HIERARCHICAL": ("session.hierarchical", lambda v: v not in ("0", "false", "")),
    "ORCH_ADAPTER_POLICY": ("session.adapter_policy", str),
    "ORCH_RETRY_ON_INVALID_ARGS": ("session.retry_on_invalid_args", int),
}


def load_config(path, base_dir=None) -> AppConfig:
    raw = tomllib.loads(Path(path).read_text(encoding="utf-8"))
    base = Path(base_dir) if base_dir else Path(path).resolve().parent
    toolsets = []
    for ts in raw.get("toolsets", []):
        roots = tuple(str((base / r).resolve()) if not os.path.isabs(r) else r
                      for r in ts.get("allowed_roots", []))
        toolsets.append(ToolsetConfig(
            toolset_id=ts["toolset_id"],
            transport=ts.get("transport", "builtin"),
            command=ts.get("command", ""),
            builtin=ts.get("builtin", ts["toolset_id"]),
            sandbox=SandboxPolicy(
                allowed_roots=roots,
                timeout_ms=ts.get("timeout_ms", 30_000),
                max_output_bytes=ts.get("max_output_bytes", 64_000),
            ),
        ))
    session_raw = raw.get("session", {})
    session = SessionConfig(**session_raw)
    config = AppConfig(
        toolsets=toolsets,
        backend=raw.get("backend", "mock:"),
        adapter_manifest=raw.get("adapter_manifest", "adapters.json"),
        session=session,
    )
    for env_key, (target, convert) in _ENV_OVERRIDES.items():
        if env_key in os.environ:
            value = convert(os.environ[env_key])
            if target.startswith("session."):
                setattr(config.session, target.split(".", 1)[1], value)
            else:
                setattr(config, target, value)
    return config


def build_registry(config: AppConfig) -> ToolRegistry:
    registry = ToolRegistry()
    for ts in config.toolsets:
        registry.register_toolset(ts)
    return registry


def load_script(path) -> list:
    """Mock backend script file: one {"adapter": ..., "reply": ...} per line."""
    entries = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.strip():
            record = json.loads(line)
            entries.append((record["adapter"], record["reply"]))
    return entries


def build_gateway(config: AppConfig) -> Gateway:
    if config.backend.startswith("mock:"):
        script_path = config.backend[len("mock:"):]
        if not script_path:
            raise ValueError("mock backend needs a script path: mock:<path>")
        return Gateway(ScriptedBackend(load_script(script_path)))
    return Gateway(OpenAIBackend(config.backend))
