"""Builtin filesystem toolset: 12 local file/directory tools.

All handlers resolve paths through the sandbox policy, so every test and
demo runs without an external server process.
"""

from __future__ import annotations

import fnmatch
import json
import stat
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Dict, List

from ..errors import UnknownToolError
from .sandbox import resolve_path, run_confined
from .types import SandboxPolicy, ToolResult, ToolSpec

Handler = Callable[[dict, SandboxPolicy], str]


@dataclass
class BuiltinToolset:
    """In-process toolset: named handlers behind ToolSpec contracts."""

    toolset_id: str
    specs: Dict[str, ToolSpec] = field(default_factory=dict)
    handlers: Dict[str, Handler] = field(default_factory=dict)

    def add(self, name: str, description: str, schema: dict, handler: Handler) -> None:
        spec = ToolSpec(toolset_id=self.toolset_id, name=name, description=description, schema=schema)
        self.specs[name] = spec
        self.handlers[name] = handler

    def list_tools(self) -> List[ToolSpec]:
        return [self.specs[name] for name in sorted(self.specs)]

    def invoke(self, tool: str, arguments: dict, policy: SandboxPolicy) -> ToolResult:
        if tool not in self.handlers:
            raise UnknownToolError(f"{self.toolset_id} has no tool {tool!r}")
        handler = self.handlers[tool]
        return run_confined(lambda: handler(arguments, policy), policy)

    def close(self) -> None:
        pass


def _obj(properties: dict, required: list) -> dict:
    return {
        "type": "object",
        "properties": properties,
        "required": required,
        "additionalProperties": False,
    }

_PATH = {"type": "string", "description": "File or directory path, relative to an allowed root."}


def _read_file(args: dict, policy: SandboxPolicy) -> str:
    path = resolve_path(args["path"], policy)
    text = path.read_text(encoding="utf-8", errors="replace")
    if "head" in args:
        text = "\n".join(text.splitlines()[: args["head"]])
    elif "tail" in args:
        text = "\n".join(text.splitlines()[-args["tail"]:])
    return text


def _read_multiple_files(args: dict, policy: SandboxPolicy) -> str:
    chunks = []
    for raw in args["paths"]:
        path = resolve_path(raw, policy)
        chunks.append(f"=== {raw} ===\n{path.read_text(encoding='utf-8', errors='replace')}")
    return "\n".join(chunks)


def _write_file(args: dict, policy: SandboxPolicy) -> str:
    path = resolve_path(args["path"], policy)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(args["content"], encoding="utf-8")
    return f"wrote {len(args['content'])} characters to {args['path']}"


def _edit_file(args: dict, policy: SandboxPolicy) -> str:
    path = resolve_path(args["path"], policy)
    text = path.read_text(encoding="utf-8")
    if args["old_text"] not in text:
        raise FileNotFoundError(f"old_text not found in {args['path']}")
    path.write_text(text.replace(args["old_text"], args["new_text"], 1), encoding="utf-8")
    return f"edited {args['path']}"


def _create_directory(args: dict, policy: SandboxPolicy) -> str:
    resolve_path(args["path"], policy).mkdir(parents=True, exist_ok=True)
    return f"created directory {args['path']}"


def _entry_line(entry: Path) -> str:
    if entry.is_dir():
        return f"[DIR] {entry.name}"
    return f"[FILE] {entry.name} ({entry.stat().st_size} bytes)"


def _list_directory(args: dict, policy: SandboxPolicy) -> str:
    path = resolve_path(args["path"], policy)
    entries = list(path.iterdir())
    if args.get("sortBy") == "size":
        entries.sort(key=lambda e: (e.stat().st_size if e.is_file() else 0), reverse=True)
    else:
        entries.sort(key=lambda e: e.name)
    return "\n".join(_entry_line(e) for e in entries)


def _tree(path: Path) -> dict:
    if path.is_dir():
        return {
            "name": path.name,
            "type": "directory",
            "children": [_tree(c) for c in sorted(path.iterdir(), key=lambda p: p.name)],
        }
    return {"name": path.name, "type": "file", "size": path.stat().st_size}


def _directory_tree(args: dict, policy: SandboxPolicy) -> str:
    return json.dumps(_tree(resolve_path(args["path"], policy)), indent=2)


def _move_file(args: dict, policy: SandboxPolicy) -> str:
    src = resolve_path(args["source"], policy)
    dst = resolve_path(args["destination"], policy)
    dst.parent.mkdir(parents=True, exist_ok=True)
    src.rename(dst)
    return f"moved {args['source']} to {args['destination']}"


def _delete_file(args: dict, policy: SandboxPolicy) -> str:
    path = resolve_path(args["path"], policy)
    if path.is_dir():
        path.rmdir()
    else:
        path.unlink()
    return f"deleted {args['path']}"


def _search_files(args: dict, policy: SandboxPolicy) -> str:
    root = resolve_path(args["path"], policy)
    pattern = args["pattern"]
    matches = sorted(
        str(p.relative_to(root))
        for p in root.rglob("*")
        if fnmatch.fnmatch(p.name, pattern)
    )
    return "\n".join(matches) if matches else "no matches"


def _get_file_info(args: dict, policy: SandboxPolicy) -> str:
    path = resolve_path(args["path"], policy)
    st = path.stat()
    info = {
        "path": args["path"],
        "type": "directory" if path.is_dir() else "file",
        "size": st.st_size,
        "modified": datetime.fromtimestamp(st.st_mtime, tz=timezone.utc).isoformat(),
        "permissions": stat.filemode(st.st_mode),
    }
    return json.dumps(info, indent=2)


def _list_allowed_directories(args: dict, policy: SandboxPolicy) -> str:
    return "\n".join(str(r) for r in policy.allowed_roots)


def filesystem_toolset(toolset_id: str = "filesystem") -> BuiltinToolset:
    """Local file management surface: reads, writes, listings, metadata."""
    ts = BuiltinToolset(toolset_id=toolset_id)
    ts.add(
        "read_file",
        "Read the contents of a text file. Optionally read only the first (head) or last (tail) N lines.",
        _obj({"path": _PATH, "head": {"type": "integer", "minimum": 1}, "tail": {"type": "integer", "minimum": 1}}, ["path"]),
        _read_file,
    )
    ts.add(
        "read_multiple_files",
        "Read several text files in one call and return their contents, each prefixed by its path.",
        _obj({"paths": {"type": "array", "items": {"type": "string"}, "minItems": 1}}, ["paths"]),
        _read_multiple_files,
    )
    ts.add(
        "write_file",
        "Create or overwrite a text file with the given content.",
        _obj({"path": _PATH, "content": {"type": "string"}}, ["path", "content"]),
        _write_file,
    )
    ts.add(
        "edit_file",
        "Replace the first occurrence of old_text with new_text inside a file.",
        _obj({"path": _PATH, "old_text": {"type": "string"}, "new_text": {"type": "string"}}, ["path", "old_text", "new_text"]),
        _edit_file,
    )
    ts.add(
        "create_directory",
        "Create a directory (including missing parents).",
        _obj({"path": _PATH}, ["path"]),
        _create_directory,
    )
    ts.add(
        "list_directory",
        "List the entries of a directory with sizes. sortBy=size orders files largest first; default is by name.",
        _obj({"path": _PATH, "sortBy": {"type": "string", "enum": ["name", "size"]}}, ["path"]),
        _list_directory,
    )
    ts.add(
        "directory_tree",
        "Return a recursive JSON tree of a directory with file sizes.",
        _obj({"path": _PATH}, ["path"]),
        _directory_tree,
    )
    ts.add(
        "move_file",
        "Move or rename a file or directory.",
        _obj({"source": _PATH, "destination": _PATH}, ["source", "destination"]),
        _move_file,
    )
    ts.add(
        "delete_file",
        "Delete a file or an empty directory.",
        _obj({"path": _PATH}, ["path"]),
        _delete_file,
    )
    ts.add(
        "search_files",
        "Recursively search a directory for entries whose name matches a glob pattern.",
        _obj({"path": _PATH, "pattern": {"type": "string"}}, ["path", "pattern"]),
        _search_files,
    )
    ts.add(
        "get_file_info",
        "Fetch metadata for a file or directory: size, last modified time, permissions.",
        _obj({"path": _PATH}, ["path"]),
        _get_file_info,
    )
    ts.add(
        "list_allowed_directories",
        "List the directories this toolset is permitted to access.",
        _obj({}, []),
        _list_allowed_directories,
    )
    return ts
