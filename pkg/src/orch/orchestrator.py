"""Hierarchical agent loop: toolset routing, tool selection, argument
generation, confined execution, and summarize-token termination."""

from __future__ import annotations

import json
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

from . import prompts
from .adapters import AdapterId, AdapterResolver
from .errors import (
    ConstraintViolationError,
    InvalidArgumentsError,
    OrchError,
    SandboxViolation,
    UnknownToolError,
)
from .gateway import Completion, CompletionRequest, Constraint, Gateway, Message
from .toolhub.registry import ToolRegistry
from .toolhub.types import ToolResult, validate_arguments

ADAPTER_POLICIES = ("base", "single", "decoupled")


@dataclass
class SessionConfig:
    max_steps: int = 10
    hierarchical: bool = True
    retry_on_invalid_args: int = 1
    system_prompt: str = prompts.DEFAULT_SYSTEM_PROMPT
    adapter_policy: str = "decoupled"  # base | single | decoupled
    max_tokens: int = 1024
    temperature: float = 0.0

    def __post_init__(self):
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        if self.retry_on_invalid_args < 0:
            raise ValueError("retry_on_invalid_args must be >= 0")
        if self.adapter_policy not in ADAPTER_POLICIES:
            raise ValueError(f"adapter_policy must be one of {ADAPTER_POLICIES}")


@dataclass
class Step:
    index: int
    toolset_id: str
    tool: str
    arguments: dict
    result: ToolResult
    model_calls: int  # 3 when toolset routing ran this step, else 2

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "toolset_id": self.toolset_id,
            "tool": self.tool,
            "arguments": self.arguments,
            "result": self.result.to_dict(),
            "model_calls": self.model_calls,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Step":
        return cls(
            index=d["index"],
            toolset_id=d["toolset_id"],
            tool=d["tool"],
            arguments=d["arguments"],
            result=ToolResult.from_dict(d["result"]),
            model_calls=d["model_calls"],
        )


@dataclass
class Trajectory:
    query: str
    steps: List[Step] = field(default_factory=list)
    summary: str = ""
    terminated_by: str = "error"  # summarize | max_steps | error
    trajectory_id: str = field(default_factory=lambda: uuid.uuid4().hex)
    summary_toolset_id: Optional[str] = None  # toolset routed when summarize was emitted

    def to_dict(self) -> dict:
        return {
            "trajectory_id": self.trajectory_id,
            "query": self.query,
            "steps": [s.to_dict() for s in self.steps],
            "summary": self.summary,
            "terminated_by": self.terminated_by,
            "summary_toolset_id": self.summary_toolset_id,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Trajectory":
        return cls(
            query=d["query"],
            steps=[Step.from_dict(s) for s in d["steps"]],
            summary=d.get("summary", ""),
            terminated_by=d["terminated_by"],
            trajectory_id=d.get("trajectory_id", uuid.uuid4().hex),
            summary_toolset_id=d.get("summary_toolset_id"),
        )


def write_trace(path, trajectory: Trajectory) -> None:
    """Trace file: one JSON object per step, then a final summary record."""
    lines = []
    for step in trajectory.steps:
        lines.append(json.dumps({"record": "step", **step.to_dict()}, sort_keys=True))
    lines.append(json.dumps({
        "record": "summary",
        "trajectory_id": trajectory.trajectory_id,
        "query": trajectory.query,
        "summary": trajectory.summary,
        "terminated_by": trajectory.terminated_by,
        "summary_toolset_id": trajectory.summary_toolset_id,
    }, sort_keys=True))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_trace(path) -> Trajectory:
    steps = []
    tail = None
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        record = json.loads(line)
        if record.pop("record") == "step":
            steps.append(Step.from_dict(record))
        else:
            tail = record
    if tail is None:
        raise ValueError("trace has no summary record")
    return Trajectory(
        query=tail["query"],
        steps=steps,
        summary=tail["summary"],
        terminated_by=tail["terminated_by"],
        trajectory_id=tail["trajectory_id"],
        summary_toolset_id=tail.get("summary_toolset_id"),
    )


class Session:
    """One agent session over a shared registry and gateway."""

    def __init__(self, registry: ToolRegistry, gateway: Gateway, config: SessionConfig):
        self.registry = registry
        self.gateway = gateway
        self.config = config
        self.resolver = AdapterResolver(registry)

    # -- adapter policy ----------------------------------------------------

    def _selection_adapter(self, toolset_id: Optional[str]) -> AdapterId:
        if self.config.adapter_policy == "base" or toolset_id is None:
            return AdapterId.base()
        # "single" models traditional fine-tuning: one shared per-toolset
        # adapter serves both selection and argument generation
        return self.resolver.select(toolset_id)

    def _argument_adapter(self, toolset_id: str, tool: str) -> AdapterId:
        if self.config.adapter_policy == "base":
            return AdapterId.base()
        if self.config.adapter_policy == "single":
            return self.resolver.select(toolset_id)
        return self.resolver.arguments(toolset_id, tool)

    # -- model calls -------------------------------------------------------

    def _complete(self, messages: List[Message], adapter: AdapterId,
                  constraint: Constraint) -> Completion:
        request = CompletionRequest(
            messages=messages,
            adapter=adapter,
            constraint=constraint,
            max_tokens=self.config.max_tokens,
            temperature=self.config.temperature,
        )
        return self.gateway.complete(request)

    def route_toolset(self, query: str, steps: List[Step]) -> tuple:
        """Returns (toolset_id, model_calls_used)."""
        toolset_ids = self.registry.toolset_ids()
        if not toolset_ids:
            raise OrchError("no toolsets registered")
        if len(toolset_ids) == 1:
            return toolset_ids[0], 0
        messages = prompts.routing_messages(self.config.system_prompt, query, steps, toolset_ids)
        completion = self._complete(messages, self.resolver.route(), Constraint.enum(toolset_ids))
        if completion.finish == "constraint-violation":
            raise ConstraintViolationError(f"routing reply not a toolset id: {completion.content!r}")
        return completion.content, 1

    def select_tool(self, query: str, steps: List[Step], toolset_id: str) -> str:
        specs = self.registry.list_tools(toolset_id)
        options = [s.name for s in specs] + [prompts.SUMMARIZE]
        messages = prompts.selection_messages(
            self.config.system_prompt, query, steps, toolset_id, specs)
        completion = self._complete(messages, self._selection_adapter(toolset_id),
                                    Constraint.enum(options))
        if completion.finish == "constraint-violation":
            raise ConstraintViolationError(f"selection reply not a tool name: {completion.content!r}")
        return completion.content

    def select_tool_flat(self, query: str, steps: List[Step]) -> tuple:
        """Flat-mode selection: one enum over every registered tool.

        Returns (toolset_id, tool) or (None, SUMMARIZE). Ambiguous names are
        qualified as '<toolset>:<tool>'.
        """
        specs_by_toolset = {ts: self.registry.list_tools(ts) for ts in self.registry.toolset_ids()}
        owner: Dict[str, tuple] = {}
        options = []
        for ts in sorted(specs_by_toolset):
            for spec in specs_by_toolset[ts]:
                key = spec.name if spec.name not in owner else f"{ts}:{spec.name}"
                owner[key] = (ts, spec.name)
                options.append(key)
        options.append(prompts.SUMMARIZE)
        messages = prompts.flat_selection_messages(
            self.config.system_prompt, query, steps, specs_by_toolset)
        completion = self._complete(messages, AdapterId.base(), Constraint.enum(options))
        if completion.finish == "constraint-violation":
            raise ConstraintViolationError(f"selection reply not a tool name: {completion.content!r}")
        if completion.content == prompts.SUMMARIZE:
            return None, prompts.SUMMARIZE
        return owner[completion.content]

    def generate_arguments(self, query: str, steps: List[Step],
                           toolset_id: str, tool: str) -> dict:
        spec = self.registry.get_tool(toolset_id, tool)
        messages = prompts.argument_messages(self.config.system_prompt, query, steps, spec)
        adapter = self._argument_adapter(toolset_id, tool)
        attempts = 1 + self.config.retry_on_invalid_args
        last_violations = "unparseable reply"
        for _ in range(attempts):
            completion = self._complete(messages, adapter, Constraint.json_schema(spec.schema))
            if completion.finish != "constraint-violation":
                arguments = json.loads(completion.content)
                report = validate_arguments(spec, arguments)
                if report.ok:
                    return arguments
                last_violations = "; ".join(report.violations)
            else:
                try:
                    candidate = json.loads(completion.content)
                    last_violations = "; ".join(validate_arguments(spec, candidate).violations)
                except (json.JSONDecodeError, TypeError):
                    last_violations = "reply was not a JSON object"
            messages = messages + [Message("user", f"Invalid arguments: {last_violations}. Try again.")]
        raise InvalidArgumentsError(last_violations)

    def _summarize(self, query: str, steps: List[Step]) -> str:
        messages = prompts.summary_messages(self.config.system_prompt, query, steps)
        completion = self._complete(messages, AdapterId.base(), Constraint.free())
        return completion.content

    # -- main loop ----------------------------------------------------------

    def run(self, query: str) -> Trajectory:
        trajectory = Trajectory(query=query)
        config = self.config
        try:
            for index in range(config.max_steps):
                routing_calls = 0
                if config.hierarchical:
                    toolset_id, routing_calls = self.route_toolset(query, trajectory.steps)
                    choice = self.select_tool(query, trajectory.steps, toolset_id)
                    if choice == prompts.SUMMARIZE:
                        tool = prompts.SUMMARIZE
                    else:
                        tool = choice
                else:
                    toolset_id, tool = self.select_tool_flat(query, trajectory.steps)

                if tool == prompts.SUMMARIZE:
                    trajectory.summary = self._summarize(query, trajectory.steps)
                    trajectory.terminated_by = "summarize"
                    trajectory.summary_toolset_id = toolset_id
                    return trajectory

                try:
                    arguments = self.generate_arguments(query, trajectory.steps, toolset_id, tool)
                    result = self._invoke(toolset_id, tool, arguments)
                except InvalidArgumentsError as exc:
                    arguments = {}
                    result = ToolResult(status="error", payload=f"invalid-arguments: {exc}")
                trajectory.steps.append(Step(
                    index=index,
                    toolset_id=toolset_id,
                    tool=tool,
                    arguments=arguments,
                    result=result,
                    model_calls=2 + routing_calls,
                ))
            trajectory.terminated_by = "max_steps"
            return trajectory
        except OrchError:
            # unrecoverable backend/constraint failure: keep the partial run
            trajectory.terminated_by = "error"
            return trajectory

    def _invoke(self, toolset_id: str, tool: str, arguments: dict) -> ToolResult:
        try:
            return self.registry.invoke(toolset_id, tool, arguments)
        except SandboxViolation as exc:
            return ToolResult(status="error", payload=f"sandbox-violation: {exc}")
        except UnknownToolError as exc:
            return ToolResult(status="error", payload=f"unknown-tool: {exc}")
