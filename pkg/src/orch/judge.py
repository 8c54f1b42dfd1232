"""Trajectory scoring: deterministic coverage oracle plus an LLM-judge mode.

A requirement is one atomic unit of evidence the query demands (a listing
entry, a metadata field, or file contents). Coverage is the fraction of
requirements whose evidence appears in the trajectory's tool outputs, mapped
to a 0-10 score with half-up rounding.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from .adapters import AdapterId
from .errors import BackendUnreachable, MalformedVerdictError, JudgeUnreachableError
from .gateway import CompletionRequest, Constraint, Gateway, Message, strip_code_fences
from .orchestrator import Trajectory

REQUIREMENT_KINDS = ("listing", "metadata", "content")


@dataclass(frozen=True)
class AtomicRequirement:
    id: str
    path: str
    kind: str  # listing | metadata | content
    satisfied_by: frozenset  # acceptable tool names (OR-set)
    metadata_field: str = ""  # metadata kind only
    line_range: Optional[tuple] = None  # content kind: (first_line, last_line)

    def __post_init__(self):
        if self.kind not in REQUIREMENT_KINDS:
            raise ValueError(f"unknown requirement kind {self.kind!r}")
        if not self.satisfied_by:
            raise ValueError("satisfied_by must be non-empty")

    @classmethod
    def from_dict(cls, d: dict) -> "AtomicRequirement":
        return cls(
            id=d["id"],
            path=d["path"],
            kind=d["kind"],
            satisfied_by=frozenset(d["satisfied_by"]),
            metadata_field=d.get("field", ""),
            line_range=tuple(d["range"]) if d.get("range") else None,
        )

    def to_dict(self) -> dict:
        out = {"id": self.id, "path": self.path, "kind": self.kind,
               "satisfied_by": sorted(self.satisfied_by)}
        if self.metadata_field:
            out["field"] = self.metadata_field
        if self.line_range:
            out["range"] = list(self.line_range)
        return out


@dataclass
class GroundTruth:
    """Snapshot of the relevant file tree plus the requirement list.

    fs_status maps path -> {size, modified, permissions, content?, type}.
    """

    fs_status: Dict[str, dict]
    requirements: List[AtomicRequirement]

    def __post_init__(self):
        for req in self.requirements:
            if req.path not in self.fs_status:
                raise ValueError(f"requirement {req.id} names unknown item {req.path!r}")

    @classmethod
    def from_dict(cls, d: dict) -> "GroundTruth":
        return cls(
            fs_status=d["fs_status"],
            requirements=[AtomicRequirement.from_dict(r) for r in d["requirements"]],
        )

    def to_dict(self) -> dict:
        return {
            "fs_status": self.fs_status,
            "requirements": [r.to_dict() for r in self.requirements],
        }

    @classmethod
    def load(cls, path) -> "GroundTruth":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


@dataclass
class CoverageReport:
    total: int
    satisfied: int
    coverage_percent: float
    score: int
    reasoning: str = ""

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "satisfied": self.satisfied,
            "coverage_percent": self.coverage_percent,
            "score": self.score,
            "reasoning": self.reasoning,
        }


def score(coverage_percent: float) -> int:
    """Half-up rounding of coverage_percent / 10, clamped to [0, 10]."""
    if not 0 <= coverage_percent <= 100:
        raise ValueError(f"coverage_percent out of range: {coverage_percent}")
    return min(10, max(0, math.floor(coverage_percent / 10 + 0.5)))


_WS_RE = re.compile(r"\s+")


def _normalize(text: str) -> str:
    return _WS_RE.sub(" ", text).strip()


def _basename(path: str) -> str:
    return path.rstrip("/").rsplit("/", 1)[-1]


def _requirement_satisfied(req: AtomicRequirement, truth: GroundTruth,
                           trajectory: Trajectory) -> bool:
    entry = truth.fs_status[req.path]
    for step in trajectory.steps:
        if step.tool not in req.satisfied_by or step.result.status != "ok":
            continue
        payload = step.result.payload
        if req.kind == "listing":
            if _basename(req.path) in payload:
                return True
        elif req.kind == "metadata":
            value = entry.get(req.metadata_field)
            if value is None:
                continue
            if _basename(req.path) in payload or req.path in payload:
                if str(value) in payload:
                    return True
        elif req.kind == "content":
            if step.result.truncated:
                continue  # truncated reads never evidence full contents
            expected = entry.get("content", "")
            if req.line_range is not None:
                first, last = req.line_range
                expected = "\n".join(expected.splitlines()[first - 1:last])
            if expected and _normalize(expected) in _normalize(payload):
                return True
    return False


def check_coverage(truth: GroundTruth, trajectory: Trajectory) -> CoverageReport:
    """Deterministic coverage oracle over machine-readable requirements.

    Extra or irrelevant steps are ignored, never penalized.
    """
    total = len(truth.requirements)
    if total == 0:
        return CoverageReport(total=0, satisfied=0, coverage_percent=0.0, score=0,
                              reasoning="no atomic requirements: nothing verifiable, coverage 0%")
    satisfied_ids = [req.id for req in truth.requirements
                     if _requirement_satisfied(req, truth, trajectory)]
    satisfied = len(satisfied_ids)
    coverage = satisfied / total * 100
    missing = [req.id for req in truth.requirements if req.id not in satisfied_ids]
    reasoning = (f"{satisfied}/{total} atomic requirements evidenced in tool outputs"
                 + (f"; missing: {', '.join(missing)}" if missing else ""))
    return CoverageReport(total=total, satisfied=satisfied, coverage_percent=coverage,
                          score=score(coverage), reasoning=reasoning)


# -- LLM judge mode -----------------------------------------------------------

JUDGE_SYSTEM_PROMPT = """You are an impartial judge of tool-calling trajectories. Decide how well the trajectory's tool calls covered what the user's query required, using only the invoked tools and their raw outputs (ignore any assistant summaries).

Method:
1. Break the query into atomic requirements: one per listed item for listing requests, one per (item, field) pair for metadata requests, one per item (or requested line range) for content requests. Expand "all"/pattern scopes using input_a.
2. Map every atomic requirement to the tools that could produce its evidence, using input_b. When several tools are suitable, any of them counts.
3. Mark a requirement satisfied only if the needed data actually appears in a tool output in input_d: the item name for listings, the specific field value for metadata, the full (non-truncated) contents for content requests. Anything unclear, truncated, or merely implied is unsatisfied. Extra or irrelevant outputs are ignored, never penalized.
4. coverage_percent = satisfied / total * 100. If there are zero atomic requirements, coverage is 0%.
5. Score_ToolCoverage = round(coverage_percent / 10) as an integer 0-10, with .5 rounding up.

Reply with strict JSON, no code fences, exactly these two keys:
{"Reasoning_ToolCoverage": "<one concise paragraph>", "Score_ToolCoverage": <integer 0-10>}"""


def _judge_user_message(trajectory: Trajectory, truth: GroundTruth,
                        tool_descriptions: str) -> str:
    calls = [
        {"tool": s.tool, "arguments": s.arguments, "status": s.result.status,
         "truncated": s.result.truncated, "output": s.result.payload}
        for s in trajectory.steps
    ]
    return (
        "input_a (fs_status):\n" + json.dumps(truth.fs_status, indent=2, sort_keys=True)
        + "\n\ninput_b (tool descriptions):\n" + tool_descriptions
        + "\n\ninput_c (query):\n" + trajectory.query
        + "\n\ninput_d (tool_call + tool_response):\n" + json.dumps(calls, indent=2)
    )


def _parse_verdict(raw: str) -> dict:
    text = strip_code_fences(raw)
    try:
        verdict = json.loads(text)
    except json.JSONDecodeError:
        # one reparse attempt: extract the outermost JSON object
        match = re.search(r"\{.*\}", text, re.DOTALL)
        if not match:
            raise MalformedVerdictError(f"no JSON object in judge reply: {raw[:200]!r}")
        try:
            verdict = json.loads(match.group(0))
        except json.JSONDecodeError as exc:
            raise MalformedVerdictError(f"unparseable judge reply: {raw[:200]!r}") from exc
    if set(verdict) != {"Reasoning_ToolCoverage", "Score_ToolCoverage"}:
        raise MalformedVerdictError(f"unexpected verdict keys: {sorted(verdict)}")
    judged = verdict["Score_ToolCoverage"]
    if not isinstance(judged, int) or isinstance(judged, bool) or not 0 <= judged <= 10:
        raise MalformedVerdictError(f"score must be an integer 0-10, got {judged!r}")
    return verdict


def llm_judge(trajectory: Trajectory, truth: GroundTruth, tool_descriptions: str,
              gateway: Gateway) -> CoverageReport:
    """Judge-mode scoring: the backend derives requirements from the query."""
    messages = [
        Message("system", JUDGE_SYSTEM_PROMPT),
        Message("user", _judge_user_message(trajectory, truth, tool_descriptions)),
    ]
    try:
        completion = gateway.complete(CompletionRequest(
            messages=messages, adapter=AdapterId.base(), constraint=Constraint.free()))
    except BackendUnreachable as exc:
        raise JudgeUnreachableError(str(exc)) from exc
    verdict = _parse_verdict(completion.content)
    judged_score = verdict["Score_ToolCoverage"]
    return CoverageReport(
        total=0, satisfied=0,
        coverage_percent=judged_score * 10.0,
        score=judged_score,
        reasoning=verdict["Reasoning_ToolCoverage"],
    )


def aggregate(reports: Sequence[CoverageReport]) -> float:
    """Mean score over reports, presented on a 0-100 percent scale."""
    if not reports:
        raise ValueError("aggregate needs at least one report")
    return sum(r.score * 10 for r in reports) / len(reports)
