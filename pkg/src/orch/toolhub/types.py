"""Core tool/toolset data types and schema validation."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, List

import jsonschema


@dataclass(frozen=True)
class ToolSpec:
    """One tool as advertised by a toolset: name, description, argument schema."""

    toolset_id: str
    name: str
    description: str
    schema: dict

    def render(self) -> str:
        """Human/model readable one-tool block used in prompts."""
        import json

        return f"- {self.name}: {self.description}\n  arguments schema: {json.dumps(self.schema, sort_keys=True)}"


@dataclass(frozen=True)
class SandboxPolicy:
    allowed_roots: tuple = ()
    timeout_ms: int = 30_000
    max_output_bytes: int = 64_000

    def __post_init__(self):
        if self.timeout_ms <= 0:
            raise ValueError("timeout_ms must be > 0")


@dataclass(frozen=True)
class ToolsetConfig:
    toolset_id: str
    transport: str  # "stdio-subprocess" | "builtin"
    sandbox: SandboxPolicy
    command: str = ""  # stdio transport only
    builtin: str = ""  # builtin transport: factory name ("filesystem", "notion", ...)


@dataclass
class ToolResult:
    status: str  # "ok" | "error" | "timeout"
    payload: str
    truncated: bool = False
    elapsed_ms: int = 0

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "payload": self.payload,
            "truncated": self.truncated,
            "elapsed_ms": self.elapsed_ms,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ToolResult":
        return cls(
            status=d["status"],
            payload=d["payload"],
            truncated=d.get("truncated", False),
            elapsed_ms=d.get("elapsed_ms", 0),
        )


@dataclass
class ValidationReport:
    violations: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_arguments(spec: ToolSpec, arguments: Any) -> ValidationReport:
    """Check an arguments value against the tool's JSON schema.

    Violations are data, not exceptions: callers decide whether to retry,
    reject, or surface them to the model.
    """
    report = ValidationReport()
    if not isinstance(arguments, dict):
        report.violations.append("arguments must be a JSON object")
        return report
    validator = jsonschema.Draft7Validator(spec.schema)
    for err in sorted(validator.iter_errors(arguments), key=lambda e: e.json_path):
        if err.validator == "required":
            # one line per missing key, phrased for model-facing retry prompts
            missing = [k for k in err.validator_value if k not in arguments]
            for key in missing:
                report.violations.append(f"missing required: {key}")
        else:
            report.violations.append(f"{err.json_path}: {err.message}")
    return report
