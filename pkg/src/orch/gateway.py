"""Completion gateway: one interface over scripted and HTTP backends.

Constraint enforcement lives gateway-side: backends return raw text and the
gateway validates it against the request's constraint, so tests run the same
code path a structured-decoding server would satisfy natively.
"""

from __future__ import annotations

import json
import math
import re
import threading
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import httpx
import jsonschema

from .adapters import AdapterId
from .errors import (
    AdapterMismatchError,
    BackendUnreachable,
    ScriptExhaustedError,
)


@dataclass(frozen=True)
class Message:
    role: str  # system | user | assistant | tool
    content: str

    def to_dict(self) -> dict:
        return {"role": self.role, "content": self.content}

    @classmethod
    def from_dict(cls, d: dict) -> "Message":
        return cls(role=d["role"], content=d["content"])


@dataclass(frozen=True)
class Constraint:
    kind: str  # "enum" | "json-schema" | "free"
    options: Tuple[str, ...] = ()
    schema: Optional[dict] = None

    def __post_init__(self):
        if self.kind == "enum":
            if not self.options:
                raise ValueError("enum constraint needs options")
            if len(set(self.options)) != len(self.options):
                raise ValueError("enum options must be duplicate-free")
        if self.kind == "json-schema" and self.schema is None:
            raise ValueError("json-schema constraint needs a schema")

    @classmethod
    def enum(cls, options: Sequence[str]) -> "Constraint":
        return cls(kind="enum", options=tuple(options))

    @classmethod
    def json_schema(cls, schema: dict) -> "Constraint":
        return cls(kind="json-schema", schema=schema)

    @classmethod
    def free(cls) -> "Constraint":
        return cls(kind="free")


@dataclass
class CompletionRequest:
    messages: List[Message]
    adapter: AdapterId
    constraint: Constraint = field(default_factory=Constraint.free)
    max_tokens: int = 1024
    temperature: float = 0.0

    def __post_init__(self):
        if not self.messages:
            raise ValueError("messages must be non-empty")
        if self.messages[0].role not in ("system", "user"):
            raise ValueError("first message must be system or user")

    def to_dict(self) -> dict:
        d = {
            "messages": [m.to_dict() for m in self.messages],
            "adapter": self.adapter.serialize(),
            "constraint": {"kind": self.constraint.kind},
            "max_tokens": self.max_tokens,
            "temperature": self.temperature,
        }
        if self.constraint.kind == "enum":
            d["constraint"]["options"] = list(self.constraint.options)
        if self.constraint.kind == "json-schema":
            d["constraint"]["schema"] = self.constraint.schema
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "CompletionRequest":
        c = d["constraint"]
        constraint = Constraint(
            kind=c["kind"],
            options=tuple(c.get("options", ())),
            schema=c.get("schema"),
        )
        return cls(
            messages=[Message.from_dict(m) for m in d["messages"]],
            adapter=AdapterId.parse(d["adapter"]),
            constraint=constraint,
            max_tokens=d["max_tokens"],
            temperature=d["temperature"],
        )


@dataclass
class Completion:
    content: str
    finish: str  # "stop" | "length" | "constraint-violation"


_FENCE_RE = re.compile(r"^```[a-zA-Z]*\n?|```$", re.MULTILINE)


def strip_code_fences(text: str) -> str:
    return _FENCE_RE.sub("", text).strip()


class ScriptedBackend:
    """Deterministic in-process backend replaying a fixed script.

    Every request is recorded (adapter, messages, constraint) so tests can
    assert on the exact prompts and adapter sequence the orchestrator issued.
    An entry's adapter may be "*" to accept any adapter.
    """

    def __init__(self, script: Sequence[Tuple[object, str]]):
        if not script:
            raise ValueError("script must be non-empty")
        self._script = [
            (a.serialize() if isinstance(a, AdapterId) else str(a), reply)
            for a, reply in script
        ]
        self._cursor = 0
        self._lock = threading.Lock()
        self.requests: List[CompletionRequest] = []

    def raw_complete(self, request: CompletionRequest) -> str:
        with self._lock:
            if self._cursor >= len(self._script):
                raise ScriptExhaustedError(
                    f"script has {len(self._script)} entries, got request #{self._cursor + 1}"
                )
            expected, reply = self._script[self._cursor]
            actual = request.adapter.serialize()
            if expected != "*" and expected != actual:
                raise AdapterMismatchError(f"expected adapter {expected!r}, got {actual!r}")
            self._cursor += 1
            self.requests.append(request)
            return reply


class OpenAIBackend:
    """OpenAI-compatible chat-completions backend.

    The request's model field carries the serialized adapter id; structured
    output fields are sent when the server advertises support.
    """

    def __init__(self, base_url: str, api_key: str = "local", timeout: float = 120.0,
                 supports_structured_output: bool = False):
        self._base_url = base_url.rstrip("/")
        self._api_key = api_key
        self._timeout = timeout
        self._supports_structured = supports_structured_output

    def raw_complete(self, request: CompletionRequest) -> str:
        body = {
            "model": request.adapter.serialize(),
            "messages": [m.to_dict() for m in request.messages],
            "max_tokens": request.max_tokens,
            "temperature": request.temperature,
        }
        if self._supports_structured and request.constraint.kind == "json-schema":
            body["response_format"] = {
                "type": "json_schema",
                "json_schema": {"name": "arguments", "schema": request.constraint.schema},
            }
        try:
            response = httpx.post(
                f"{self._base_url}/v1/chat/completions",
                json=body,
                headers={"Authorization": f"Bearer {self._api_key}"},
                timeout=self._timeout,
            )
            response.raise_for_status()
        except httpx.HTTPError as exc:
            raise BackendUnreachable(str(exc)) from exc
        data = response.json()
        return data["choices"][0]["message"]["content"]


class Gateway:
    """Validates constraints around any backend's raw completions."""

    def __init__(self, backend, tokenizer: Optional[Callable[[str], int]] = None):
        self._backend = backend
        self._tokenizer = tokenizer

    def complete(self, request: CompletionRequest) -> Completion:
        raw = self._backend.raw_complete(request)
        constraint = request.constraint
        if constraint.kind == "enum":
            candidate = raw.strip()
            if candidate in constraint.options:
                return Completion(content=candidate, finish="stop")
            return Completion(content=raw, finish="constraint-violation")
        if constraint.kind == "json-schema":
            try:
                value = json.loads(strip_code_fences(raw))
                jsonschema.validate(value, constraint.schema)
            except (json.JSONDecodeError, jsonschema.ValidationError):
                return Completion(content=raw, finish="constraint-violation")
            return Completion(content=raw, finish="stop")
        return Completion(content=raw, finish="stop")

    def count_prompt_payload(self, messages: Sequence[Message]) -> Tuple[int, int]:
        """Exact character count and an approximate token count.

        Without a configured tokenizer the approximation is ceil(chars / 4).
        """
        characters = sum(len(m.content) for m in messages)
        if self._tokenizer is not None:
            return characters, self._tokenizer("".join(m.content for m in messages))
        return characters, math.ceil(characters / 4)


def count_prompt_payload(messages: Sequence[Message]) -> Tuple[int, int]:
    characters = sum(len(m.content) for m in messages)
    return characters, math.ceil(characters / 4)
