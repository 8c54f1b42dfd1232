"""LoRA adapter training over mask-labelled rows.

One run trains one adapter: a per-toolset selector (`sel:<toolset>`) on
selection instances, or a per-tool argument adapter (`arg:<toolset>:<tool>`)
on argument instances. Loss is next-token cross-entropy computed only
over supervised labels; a batch with no supervised tokens contributes
exactly zero.
"""

from __future__ import annotations

import json
import random
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Sequence

import torch

from .labels import IGNORE, Instance, TokenLabelRow, read_instances, spans_to_token_labels
from .model import TinyCausalLM, apply_lora, lora_parameters, lora_state_dict
from .tokenizer import WordTokenizer


class ScopeMismatchError(ValueError):
    """Dataset contains instances outside the adapter's (kind, toolset, tool) scope."""


class TrainingFailure(RuntimeError):
    """Loss went non-finite or the run could not produce an artifact."""


@dataclass
class Hyperparameters:
    # smoke defaults: tiny model, few epochs — trend checks only
    rank: int = 4
    learning_rate: float = 1e-3
    epochs: int = 2
    batch_size: int = 4
    d_model: int = 64
    n_heads: int = 2
    n_layers: int = 2
    max_len: int = 1024
    validation_fraction: float = 0.2
    seed: int = 0


@dataclass
class TrainRun:
    adapter_id: str  # "sel:<toolset>" | "arg:<toolset>:<tool>"
    dataset: Path
    output: Path
    hyperparameters: Hyperparameters = field(default_factory=Hyperparameters)


def expected_adapter(instance: Instance) -> str:
    if instance.kind == "selection":
        return f"sel:{instance.toolset_id}"
    return f"arg:{instance.toolset_id}:{instance.tool}"


def check_scope(adapter_id: str, instances: Sequence[Instance]) -> None:
    mismatched = sorted({expected_adapter(i) for i in instances} - {adapter_id})
    if mismatched:
        raise ScopeMismatchError(
            f"dataset holds instances for {mismatched}, run targets {adapter_id}")


def masked_loss(logits: torch.Tensor, labels: torch.Tensor) -> torch.Tensor:
    """Next-token cross-entropy over non-IGNORE labels; zero when none."""
    shifted_logits = logits[:, :-1, :]
    shifted_labels = labels[:, 1:]
    mask = shifted_labels != IGNORE
    if not mask.any():
        return logits.sum() * 0.0  # keeps the graph, contributes nothing
    flat_logits = shifted_logits[mask]
    flat_labels = shifted_labels[mask]
    return torch.nn.functional.cross_entropy(flat_logits, flat_labels)


def pad_batch(rows: Sequence[TokenLabelRow], pad_id: int = 0) -> tuple:
    width = max(len(r.input_ids) for r in rows)
    ids = torch.full((len(rows), width), pad_id, dtype=torch.long)
    labels = torch.full((len(rows), width), IGNORE, dtype=torch.long)
    for i, row in enumerate(rows):
        ids[i, : len(row.input_ids)] = torch.tensor(row.input_ids)
        labels[i, : len(row.labels)] = torch.tensor(row.labels)
    return ids, labels


def build_rows(instances: Sequence[Instance],
               tokenizer: WordTokenizer) -> List[TokenLabelRow]:
    rows = []
    for instance in instances:
        token_ids, offsets = tokenizer.encode(instance.full_text())
        rows.append(spans_to_token_labels(instance, token_ids, offsets))
    return rows


def _epoch_loss(model, rows, batch_size, optimizer=None) -> float:
    total, batches = 0.0, 0
    for start in range(0, len(rows), batch_size):
        ids, labels = pad_batch(rows[start: start + batch_size])
        logits = model(ids)
        loss = masked_loss(logits, labels)
        if optimizer is not None:
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
        total += float(loss.detach())
        batches += 1
    return total / max(batches, 1)


def train(run: TrainRun) -> Dict:
    """Trains one adapter; writes artifact + metrics, returns the metrics."""
    instances = read_instances(run.dataset)
    if not instances:
        raise TrainingFailure("dataset is empty")
    check_scope(run.adapter_id, instances)

    hp = run.hyperparameters
    torch.manual_seed(hp.seed)
    rng = random.Random(hp.seed)
    tokenizer = WordTokenizer.fit([i.full_text() for i in instances])
    rows = build_rows(instances, tokenizer)
    rows = [TokenLabelRow(r.input_ids[: hp.max_len], r.labels[: hp.max_len],
                          r.instance_id) for r in rows]
    rng.shuffle(rows)
    n_val = max(1, int(len(rows) * hp.validation_fraction)) if len(rows) > 1 else 0
    val_rows, train_rows = rows[:n_val], rows[n_val:]

    model = apply_lora(TinyCausalLM(tokenizer.vocab_size, hp.d_model, hp.n_heads,
                                    hp.n_layers, hp.max_len), hp.rank)
    optimizer = torch.optim.Adam(lora_parameters(model), lr=hp.learning_rate)

    epoch_losses = []
    for _ in range(hp.epochs):
        model.train()
        epoch_losses.append(_epoch_loss(model, train_rows, hp.batch_size, optimizer))
        if not all(map(torch.isfinite, map(torch.tensor, epoch_losses))):
            raise TrainingFailure(f"non-finite training loss: {epoch_losses}")

    model.eval()
    with torch.no_grad():
        val_loss = _epoch_loss(model, val_rows, hp.batch_size) if val_rows else 0.0

    run.output.parent.mkdir(parents=True, exist_ok=True)
    torch.save({"adapter_id": run.adapter_id, "rank": hp.rank,
                "vocab": tokenizer.token_to_id,
                "state": lora_state_dict(model)}, run.output)
    metrics = {
        "adapter_id": run.adapter_id,
        "instances": len(instances),
        "epoch_train_losses": epoch_losses,
        "final_train_loss": epoch_losses[-1],
        "validation_loss": val_loss,
        "hyperparameters": asdict(hp),
    }
    metrics_path = run.output.with_suffix(".metrics.json")
    metrics_path.write_text(json.dumps(metrics, indent=2), encoding="utf-8")
    return metrics
