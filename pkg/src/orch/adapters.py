"""Adapter identities, stage resolution, and the logical LRU swap cache.

The registry tracks logical load state only; the serving backend does the
physical loads keyed by the serialized adapter id.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Tuple

from .errors import UnknownAdapterError, UnknownToolError, UnknownToolsetError


@dataclass(frozen=True)
class AdapterId:
    kind: str  # "base" | "selector" | "argument"
    toolset_id: Optional[str] = None
    tool: Optional[str] = None

    def __post_init__(self):
        if self.kind == "base" and (self.toolset_id or self.tool):
            raise ValueError("base adapter carries no toolset/tool")
        if self.kind == "selector" and (not self.toolset_id or self.tool):
            raise ValueError("selector adapter carries a toolset only")
        if self.kind == "argument" and not (self.toolset_id and self.tool):
            raise ValueError("argument adapter carries toolset and tool")
        if self.kind not in ("base", "selector", "argument"):
            raise ValueError(f"unknown adapter kind {self.kind!r}")

    @classmethod
    def base(cls) -> "AdapterId":
        return cls(kind="base")

    @classmethod
    def selector(cls, toolset_id: str) -> "AdapterId":
        return cls(kind="selector", toolset_id=toolset_id)

    @classmethod
    def argument(cls, toolset_id: str, tool: str) -> "AdapterId":
        return cls(kind="argument", toolset_id=toolset_id, tool=tool)

    def serialize(self) -> str:
        if self.kind == "base":
            return "base"
        if self.kind == "selector":
            return f"sel:{self.toolset_id}"
        return f"arg:{self.toolset_id}:{self.tool}"

    @classmethod
    def parse(cls, text: str) -> "AdapterId":
        if text == "base":
            return cls.base()
        if text.startswith("sel:"):
            toolset = text[4:]
            if not toolset:
                raise UnknownAdapterError(f"bad adapter id {text!r}")
            return cls.selector(toolset)
        if text.startswith("arg:"):
            rest = text[4:]
            toolset, sep, tool = rest.partition(":")
            if not (toolset and sep and tool):
                raise UnknownAdapterError(f"bad adapter id {text!r}")
            return cls.argument(toolset, tool)
        raise UnknownAdapterError(f"bad adapter id {text!r}")


class AdapterResolver:
    """Maps orchestration stages to adapter ids, checking registration."""

    def __init__(self, registry=None):
        self._registry = registry

    def route(self) -> AdapterId:
        return AdapterId.base()

    def select(self, toolset_id: str) -> AdapterId:
        self._check_toolset(toolset_id)
        return AdapterId.selector(toolset_id)

    def arguments(self, toolset_id: str, tool: str) -> AdapterId:
        self._check_toolset(toolset_id)
        if self._registry is not None:
            names = {s.name for s in self._registry.list_tools(toolset_id)}
            if tool not in names:
                raise UnknownToolError(f"{toolset_id} has no tool {tool!r}")
        return AdapterId.argument(toolset_id, tool)

    def _check_toolset(self, toolset_id: str) -> None:
        if self._registry is not None and toolset_id not in self._registry.toolset_ids():
            raise UnknownToolsetError(f"unknown toolset {toolset_id!r}")


@dataclass
class AdapterCache:
    """LRU over loaded adapters with the base model pinned."""

    capacity: int = 8
    loaded: List[AdapterId] = field(default_factory=list)  # last = most recent
    load_events: int = 0
    evict_events: int = 0

    def __post_init__(self):
        if self.capacity < 1:
            raise ValueError("capacity must be >= 1")

    def ensure_loaded(self, adapter: AdapterId) -> Optional[AdapterId]:
        """Make adapter resident and most-recent; return the eviction, if any."""
        if adapter in self.loaded:
            self.loaded.remove(adapter)
            self.loaded.append(adapter)
            return None
        evicted = None
        if len(self.loaded) >= self.capacity:
            # evict the least-recently-used non-base adapter
            for candidate in self.loaded:
                if candidate.kind != "base":
                    evicted = candidate
                    break
            if evicted is None:
                raise ValueError("cache full of pinned adapters")
            self.loaded.remove(evicted)
            self.evict_events += 1
        self.loaded.append(adapter)
        self.load_events += 1
        return evicted


def write_manifest(path, entries: List[Tuple[AdapterId, str]]) -> None:
    """Adapter manifest: serialized ids mapped to trained artifact paths."""
    data = [
        {"adapter_id": adapter.serialize(), "artifact_path": str(artifact)}
        for adapter, artifact in entries
    ]
    Path(path).write_text(json.dumps(data, indent=2) + "\n", encoding="utf-8")


def load_manifest(path) -> List[Tuple[AdapterId, str]]:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    return [(AdapterId.parse(e["adapter_id"]), e["artifact_path"]) for e in data]
