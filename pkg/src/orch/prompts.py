"""Canonical prompt construction shared by the run loop and the dataset
extractor. Extraction replays these builders, so any change here changes the
training contexts byte-for-byte.
"""

from __future__ import annotations

import json
from typing import Dict, List, Sequence

from .gateway import Message
from .toolhub.types import ToolSpec

SUMMARIZE = "summarize"

DEFAULT_SYSTEM_PROMPT = (
    "You are a local agent orchestrator. Work through the user's request "
    "step by step by calling tools, then summarize the results."
)


def canonical_call(tool: str, arguments: dict) -> str:
    """Assistant tool-call turn: sorted keys, no insignificant whitespace.

    Built by concatenation so mask offsets are derivable without re-parsing.
    """
    return '{"arguments":' + canonical_arguments(arguments) + ',"name":"' + tool + '"}'


def canonical_arguments(arguments: dict) -> str:
    return json.dumps(arguments, sort_keys=True, separators=(",", ":"))


def call_mask_spans(tool: str, arguments: dict) -> Dict[str, tuple]:
    """Character spans of the name and the arguments object inside
    canonical_call(tool, arguments)."""
    args_ser = canonical_arguments(arguments)
    args_start = len('{"arguments":')
    args_end = args_start + len(args_ser)
    name_start = args_end + len(',"name":"')
    name_end = name_start + len(tool)
    return {"arguments": (args_start, args_end), "name": (name_start, name_end)}


def render_result(result) -> str:
    if result.status == "ok":
        return result.payload
    return f"[{result.status}] {result.payload}"


def render_toolset_block(toolset_id: str, specs: Sequence[ToolSpec]) -> str:
    lines = [f"Tools in toolset '{toolset_id}':"]
    lines.extend(spec.render() for spec in specs)
    return "\n".join(lines)


def history_messages(system_text: str, query: str, steps: Sequence) -> List[Message]:
    messages = [Message("system", system_text), Message("user", query)]
    for step in steps:
        messages.append(Message("assistant", canonical_call(step.tool, step.arguments)))
        messages.append(Message("tool", render_result(step.result)))
    return messages


def routing_messages(system_prompt: str, query: str, steps: Sequence,
                     toolset_ids: Sequence[str]) -> List[Message]:
    system_text = (
        f"{system_prompt}\n\n"
        "Pick the toolset most appropriate for the next step. "
        "Reply with exactly one toolset id from: " + ", ".join(toolset_ids) + "."
    )
    return history_messages(system_text, query, steps)


def selection_messages(system_prompt: str, query: str, steps: Sequence,
                       toolset_id: str, specs: Sequence[ToolSpec]) -> List[Message]:
    system_text = (
        f"{system_prompt}\n\n"
        f"{render_toolset_block(toolset_id, specs)}\n"
        f"Reply with the name of the tool to call next, or '{SUMMARIZE}' if the task is complete."
    )
    return history_messages(system_text, query, steps)


def flat_selection_messages(system_prompt: str, query: str, steps: Sequence,
                            specs_by_toolset: Dict[str, Sequence[ToolSpec]]) -> List[Message]:
    blocks = [render_toolset_block(ts, specs_by_toolset[ts]) for ts in sorted(specs_by_toolset)]
    system_text = (
        f"{system_prompt}\n\n"
        + "\n\n".join(blocks)
        + f"\nReply with the name of the tool to call next, or '{SUMMARIZE}' if the task is complete."
    )
    return history_messages(system_text, query, steps)


def argument_messages(system_prompt: str, query: str, steps: Sequence,
                      spec: ToolSpec) -> List[Message]:
    system_text = (
        f"{system_prompt}\n\n"
        f"You are calling the tool '{spec.name}' from toolset '{spec.toolset_id}'.\n"
        f"{spec.description}\n"
        f"Arguments schema: {json.dumps(spec.schema, sort_keys=True)}\n"
        "Reply with a single JSON object containing the arguments."
    )
    return history_messages(system_text, query, steps)


def summary_messages(system_prompt: str, query: str, steps: Sequence) -> List[Message]:
    messages = history_messages(system_prompt, query, steps)
    messages.append(Message("user", "The task is complete. Summarize the results for the user."))
    return messages


def render_messages(messages: Sequence[Message]) -> str:
    """Flatten a message list to the canonical context text used in
    training instances."""
    return "\n".join(f"{m.role}: {m.content}" for m in messages)
