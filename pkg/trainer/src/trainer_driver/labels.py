"""Character-span loss masks → token-level supervision labels.

A training instance carries `context`, `target`, and mask spans given as
[start, end) character ranges *within the target*. The model is trained
on the concatenation `context + "\n" + target`; a token is supervised
(label = its own id) iff its character range intersects any mask span,
and every other token — all of the context included — gets the IGNORE
marker.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import List, Sequence, Tuple

IGNORE = -100

CONTEXT_SEPARATOR = "\n"


class OffsetMismatchError(ValueError):
    """Token offsets do not cover the instance's target text contiguously."""


@dataclass
class Instance:
    """The slice of the dataset JSONL row the trainer consumes."""

    kind: str  # "selection" | "argument"
    toolset_id: str
    context: str
    target: str
    mask_spans: List[Tuple[int, int]]
    tool: str = ""
    instance_id: str = ""

    @classmethod
    def from_dict(cls, d: dict) -> "Instance":
        instance_id = f"{d.get('trajectory_id', '')}:{d.get('step_index', -1)}:{d['kind']}"
        return cls(kind=d["kind"], toolset_id=d["toolset_id"],
                   context=d["context"], target=d["target"],
                   mask_spans=[tuple(s) for s in d["mask_spans"]],
                   tool=d.get("tool", ""), instance_id=instance_id)

    def full_text(self) -> str:
        return self.context + CONTEXT_SEPARATOR + self.target

    def absolute_spans(self) -> List[Tuple[int, int]]:
        base = len(self.context) + len(CONTEXT_SEPARATOR)
        return [(base + a, base + b) for a, b in self.mask_spans]


@dataclass
class TokenLabelRow:
    input_ids: List[int]
    labels: List[int]  # token id, or IGNORE
    instance_id: str = ""

    def __post_init__(self):
        if len(self.input_ids) != len(self.labels):
            raise ValueError("input_ids and labels must have equal length")

    def supervised_positions(self) -> List[int]:
        return [i for i, label in enumerate(self.labels) if label != IGNORE]

    def to_dict(self) -> dict:
        return {"input_ids": self.input_ids, "labels": self.labels,
                "instance_id": self.instance_id}

    @classmethod
    def from_dict(cls, d: dict) -> "TokenLabelRow":
        return cls(input_ids=list(d["input_ids"]), labels=list(d["labels"]),
                   instance_id=d.get("instance_id", ""))


def spans_to_token_labels(instance: Instance, token_ids: Sequence[int],
                          offsets: Sequence[Tuple[int, int]]) -> TokenLabelRow:
    """Labels token i with its own id iff its offset intersects a mask span.

    `offsets` are [start, end) character ranges over instance.full_text().
    Raises OffsetMismatchError when the offsets leave any target character
    uncovered (the contiguity precondition).
    """
    if len(token_ids) != len(offsets):
        raise OffsetMismatchError("token ids and offsets differ in length")
    text = instance.full_text()
    covered = [False] * len(text)
    for start, end in offsets:
        if start < 0 or end > len(text) or start >= end:
            raise OffsetMismatchError(f"offset out of range: ({start}, {end})")
        for i in range(start, end):
            covered[i] = True
    target_start = len(instance.context) + len(CONTEXT_SEPARATOR)
    if not all(covered[target_start:]):
        raise OffsetMismatchError("offsets do not cover the target contiguously")

    spans = instance.absolute_spans()
    labels = []
    for token_id, (start, end) in zip(token_ids, offsets):
        hit = any(start < b and a < end for a, b in spans)
        labels.append(token_id if hit else IGNORE)
    return TokenLabelRow(input_ids=list(token_ids), labels=labels,
                         instance_id=instance.instance_id)


def read_instances(path) -> List[Instance]:
    rows = []
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            if line.strip():
                rows.append(Instance.from_dict(json.loads(line)))
    return rows


def write_rows(path, rows: Sequence[TokenLabelRow]) -> None:
    Path(path).write_text(
        "".join(json.dumps(r.to_dict()) + "\n" for r in rows), encoding="utf-8")


def read_rows(path) -> List[TokenLabelRow]:
    rows = []
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            if line.strip():
                rows.append(TokenLabelRow.from_dict(json.loads(line)))
    return rows
