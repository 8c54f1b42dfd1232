"""Synthetic query generation, mask-annotated instance extraction, and
split/reservation logic for the selector and per-tool argument adapters."""

from __future__ import annotations

import json
import random
import re
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from . import prompts
from .adapters import AdapterId
from .errors import (
    InsufficientQueriesError,
    LintBudgetExhausted,
    MalformedTrajectoryError,
)
from .gateway import CompletionRequest, Constraint, Gateway, Message
from .orchestrator import Trajectory
from .toolhub.types import ToolSpec

LONG_TRAJECTORY_STEPS = 20  # beyond this a trajectory is flagged for review


@dataclass
class SyntheticQuery:
    tool: str
    toolset_id: str
    text: str
    id: str = field(default_factory=lambda: uuid.uuid4().hex)

    def to_dict(self) -> dict:
        return {"id": self.id, "tool": self.tool, "toolset_id": self.toolset_id, "text": self.text}

    @classmethod
    def from_dict(cls, d: dict) -> "SyntheticQuery":
        return cls(tool=d["tool"], toolset_id=d["toolset_id"], text=d["text"], id=d["id"])


@dataclass
class TrainingInstance:
    kind: str  # "selection" | "argument"
    toolset_id: str
    context: str
    target: str
    mask_spans: List[Tuple[int, int]]  # [start, end) within target
    tool: str = ""
    trajectory_id: str = ""
    step_index: int = -1  # -1 marks the terminal summarize instance

    def masked_text(self) -> str:
        return "".join(self.target[a:b] for a, b in self.mask_spans)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "toolset_id": self.toolset_id,
            "tool": self.tool,
            "context": self.context,
            "target": self.target,
            "mask_spans": [list(span) for span in self.mask_spans],
            "trajectory_id": self.trajectory_id,
            "step_index": self.step_index,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TrainingInstance":
        return cls(
            kind=d["kind"],
            toolset_id=d["toolset_id"],
            tool=d.get("tool", ""),
            context=d["context"],
            target=d["target"],
            mask_spans=[tuple(span) for span in d["mask_spans"]],
            trajectory_id=d.get("trajectory_id", ""),
            step_index=d.get("step_index", -1),
        )


@dataclass
class DatasetSplit:
    train: List[TrainingInstance]
    validation: List[TrainingInstance]
    seed: int
    train_trajectory_ids: List[str] = field(default_factory=list)
    validation_trajectory_ids: List[str] = field(default_factory=list)


# -- query synthesis ---------------------------------------------------------

_ABS_PATH_RE = re.compile(r'(?:^|[\s"\'(=,])/[\w.~-]|[A-Za-z]:\\')


def lint_query(text: str, global_tool_names: Sequence[str]) -> List[str]:
    """Generation-rule lint: no absolute paths, no tool names mentioned."""
    violations = []
    if _ABS_PATH_RE.search(text):
        violations.append("contains an absolute path")
    lowered = text.lower()
    for name in global_tool_names:
        if re.search(rf"\b{re.escape(name.lower())}\b", lowered):
            violations.append(f"mentions tool name {name!r}")
    return violations


def _generation_messages(spec: ToolSpec, global_tool_names: Sequence[str]) -> List[Message]:
    system_text = (
        "You write ONE realistic English user request per reply: a single line, "
        "no quotes, no numbering, no explanations.\n"
        f"The request must require using this capability: {spec.description}\n"
        "Rules:\n"
        "- Never include absolute paths; refer to locations generically or with relative subpaths.\n"
        "- Never mention any tool name, schema, or parameter from the global tool list.\n"
        "- Vary phrasing, tone, and structure aggressively across requests.\n"
        "- Use diverse item names, extensions, and concrete numbers.\n"
        f"Global tool list: {', '.join(sorted(global_tool_names))}"
    )
    return [Message("system", system_text), Message("user", "Generate the next request.")]


def synthesize_queries(
    spec: ToolSpec,
    n: int,
    gateway: Gateway,
    global_tool_names: Sequence[str],
    retry_budget: Optional[int] = None,
) -> List[SyntheticQuery]:
    """Ask the generator backend for n lint-clean queries for one tool."""
    if retry_budget is None:
        retry_budget = max(10, 3 * n)
    messages = _generation_messages(spec, global_tool_names)
    queries: List[SyntheticQuery] = []
    failures = 0
    while len(queries) < n:
        completion = gateway.complete(CompletionRequest(
            messages=messages, adapter=AdapterId.base(), constraint=Constraint.free(),
            temperature=1.0,
        ))
        text = completion.content.strip()
        if lint_query(text, global_tool_names):
            failures += 1
            if failures > retry_budget:
                raise LintBudgetExhausted(
                    f"{failures} lint failures while generating {n} queries for {spec.name}")
            continue
        queries.append(SyntheticQuery(tool=spec.name, toolset_id=spec.toolset_id, text=text))
    return queries


# -- instance extraction ------------------------------------------------------

def extract_instances(
    trajectory: Trajectory,
    specs_by_toolset: Dict[str, Sequence[ToolSpec]],
    system_prompt: str = prompts.DEFAULT_SYSTEM_PROMPT,
) -> Tuple[List[TrainingInstance], List[TrainingInstance]]:
    """One selection + one argument instance per step, plus the terminal
    summarize selection instance on summarize-terminated trajectories.

    Contexts replay the orchestrator's prompt builders, so training sees
    exactly the prompts inference will issue.
    """
    if not trajectory.steps:
        raise MalformedTrajectoryError("trajectory has no steps")
    selection: List[TrainingInstance] = []
    argument: List[TrainingInstance] = []
    query = trajectory.query
    for i, step in enumerate(trajectory.steps):
        if step.toolset_id not in specs_by_toolset:
            raise MalformedTrajectoryError(f"step {i} names unknown toolset {step.toolset_id!r}")
        specs = specs_by_toolset[step.toolset_id]
        prior = trajectory.steps[:i]
        target = prompts.canonical_call(step.tool, step.arguments)
        spans = prompts.call_mask_spans(step.tool, step.arguments)
        sel_context = prompts.render_messages(prompts.selection_messages(
            system_prompt, query, prior, step.toolset_id, specs))
        selection.append(TrainingInstance(
            kind="selection", toolset_id=step.toolset_id, tool=step.tool,
            context=sel_context, target=target, mask_spans=[spans["name"]],
            trajectory_id=trajectory.trajectory_id, step_index=i,
        ))
        tool_spec = next((s for s in specs if s.name == step.tool), None)
        if tool_spec is None:
            raise MalformedTrajectoryError(f"step {i} names unknown tool {step.tool!r}")
        arg_context = prompts.render_messages(prompts.argument_messages(
            system_prompt, query, prior, tool_spec))
        argument.append(TrainingInstance(
            kind="argument", toolset_id=step.toolset_id, tool=step.tool,
            context=arg_context, target=target, mask_spans=[spans["arguments"]],
            trajectory_id=trajectory.trajectory_id, step_index=i,
        ))
    if trajectory.terminated_by == "summarize":
        toolset_id = trajectory.summary_toolset_id or trajectory.steps[-1].toolset_id
        specs = specs_by_toolset.get(toolset_id, [])
        sel_context = prompts.render_messages(prompts.selection_messages(
            system_prompt, query, trajectory.steps, toolset_id, specs))
        selection.append(TrainingInstance(
            kind="selection", toolset_id=toolset_id, tool=prompts.SUMMARIZE,
            context=sel_context, target=prompts.SUMMARIZE,
            mask_spans=[(0, len(prompts.SUMMARIZE))],
            trajectory_id=trajectory.trajectory_id, step_index=-1,
        ))
    return selection, argument


# -- splitting and reservation ------------------------------------------------

def split_dataset(
    trajectories: Sequence[Trajectory],
    specs_by_toolset: Dict[str, Sequence[ToolSpec]],
    ratio: float = 0.8,
    seed: int = 0,
    system_prompt: str = prompts.DEFAULT_SYSTEM_PROMPT,
) -> DatasetSplit:
    """Deterministic trajectory-granular split; no trajectory contributes to
    both sides."""
    if len(trajectories) < 2:
        raise MalformedTrajectoryError("need at least 2 trajectories to split")
    order = list(trajectories)
    random.Random(seed).shuffle(order)
    n_train = round(ratio * len(order))
    train_trajs, val_trajs = order[:n_train], order[n_train:]
    split = DatasetSplit(train=[], validation=[], seed=seed,
                         train_trajectory_ids=[t.trajectory_id for t in train_trajs],
                         validation_trajectory_ids=[t.trajectory_id for t in val_trajs])
    for traj in train_trajs:
        sel, arg = extract_instances(traj, specs_by_toolset, system_prompt)
        split.train.extend(sel + arg)
    for traj in val_trajs:
        sel, arg = extract_instances(traj, specs_by_toolset, system_prompt)
        split.validation.extend(sel + arg)
    return split


def reserve_test_set(
    queries_by_tool: Dict[str, Sequence[SyntheticQuery]],
    total: int = 50,
    seed: int = 0,
) -> List[SyntheticQuery]:
    """Balanced reservation: per-tool counts differ by at most one."""
    tools = sorted(queries_by_tool)
    if not tools:
        raise InsufficientQueriesError("no tools to reserve from")
    for tool in tools:
        if not queries_by_tool[tool]:
            raise InsufficientQueriesError(f"tool {tool!r} has zero queries")
    rng = random.Random(seed)
    base = total // len(tools)
    extras = total - base * len(tools)
    bonus_tools = set(rng.sample(tools, extras)) if extras else set()
    reserved: List[SyntheticQuery] = []
    for tool in tools:
        want = base + (1 if tool in bonus_tools else 0)
        pool = list(queries_by_tool[tool])
        if len(pool) < want:
            raise InsufficientQueriesError(f"tool {tool!r} has {len(pool)} queries, needs {want}")
        reserved.extend(rng.sample(pool, want))
    return reserved


def lint_trajectories(trajectories: Sequence[Trajectory]) -> List[str]:
    """Flag outlier trajectories for manual review; never filters them."""
    flags = []
    for traj in trajectories:
        if len(traj.steps) > LONG_TRAJECTORY_STEPS:
            flags.append(f"{traj.trajectory_id}: {len(traj.steps)} steps exceeds "
                         f"{LONG_TRAJECTORY_STEPS}")
    return flags


# -- serialization -------------------------------------------------------------

def write_instances(path, instances: Sequence[TrainingInstance]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for instance in instances:
            fh.write(json.dumps(instance.to_dict(), sort_keys=True) + "\n")


def read_instances(path) -> List[TrainingInstance]:
    instances = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.strip():
            instances.append(TrainingInstance.from_dict(json.loads(line)))
    return instances
