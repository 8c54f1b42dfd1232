#!/usr/bin/env python3
"""Run one scripted end-to-end session against the builtin filesystem toolset.

Creates a throwaway sandbox, drives the hierarchical loop with a canned
model script (no network backend needed), and prints the resulting
trajectory as JSON.
"""

import json
import sys
import tempfile
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from orch.gateway import Gateway, ScriptedBackend
from orch.orchestrator import Session, SessionConfig
from orch.toolhub import SandboxPolicy, ToolRegistry, ToolsetConfig


def main():
    with tempfile.TemporaryDirectory() as root:
        (Path(root) / "notes.txt").write_text("milk, eggs, bread\n")
        registry = ToolRegistry()
        registry.register_toolset(ToolsetConfig(
            toolset_id="filesystem", transport="builtin", builtin="filesystem",
            sandbox=SandboxPolicy(allowed_roots=(root,), timeout_ms=5000)))

        script = [
            ("sel:filesystem", "list_directory"),
            ("arg:filesystem:list_directory", '{"path": "."}'),
            ("sel:filesystem", "read_file"),
            ("arg:filesystem:read_file", '{"path": "notes.txt"}'),
            ("sel:filesystem", "summarize"),
            ("base", "The sandbox holds notes.txt, a three-item shopping list."),
        ]
        session = Session(registry, Gateway(ScriptedBackend(script)), SessionConfig())
        trajectory = session.run("what files are here, and what do the notes say?")
        registry.close()

    print(json.dumps(trajectory.to_dict(), indent=2))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
