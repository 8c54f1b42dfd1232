import json

import pytest
import torch

from trainer_driver import (
    IGNORE,
    Hyperparameters,
    Instance,
    ScopeMismatchError,
    TinyCausalLM,
    TokenLabelRow,
    TrainRun,
    TrainingFailure,
    apply_lora,
    build_rows,
    check_scope,
    lora_parameters,
    lora_state_dict,
    masked_loss,
    pad_batch,
    train,
)
from trainer_driver.tokenizer import WordTokenizer


def selection_instance(toolset="filesystem", tool="read_file", i=0):
    target = tool
    return {
        "kind": "selection", "toolset_id": toolset, "tool": tool,
        "context": f"user: request number {i} about the workspace",
        "target": target, "mask_spans": [[0, len(target)]],
        "trajectory_id": f"traj{i}", "step_index": 0,
    }


def argument_instance(toolset="filesystem", tool="read_file", i=0):
    target = f'{{"path":"file_{i}.txt"}}'
    return {
        "kind": "argument", "toolset_id": toolset, "tool": tool,
        "context": f"user: request number {i} about the workspace",
        "target": target, "mask_spans": [[0, len(target)]],
        "trajectory_id": f"traj{i}", "step_index": 0,
    }


def write_dataset(path, rows):
    path.write_text("".join(json.dumps(r) + "\n" for r in rows))


# -- scope ------------------------------------------------------------------------

def test_scope_accepts_matching_selection_set():
    instances = [Instance.from_dict(selection_instance(i=i)) for i in range(3)]
    check_scope("sel:filesystem", instances)


def test_scope_rejects_mixed_tools_in_argument_adapter():
    instances = [Instance.from_dict(argument_instance(tool="read_file")),
                 Instance.from_dict(argument_instance(tool="write_file", i=1))]
    with pytest.raises(ScopeMismatchError):
        check_scope("arg:filesystem:read_file", instances)


def test_scope_rejects_wrong_toolset():
    instances = [Instance.from_dict(selection_instance(toolset="notion"))]
    with pytest.raises(ScopeMismatchError):
        check_scope("sel:filesystem", instances)


# -- loss masking --------------------------------------------------------------------

def test_all_ignore_batch_contributes_zero_loss():
    model = TinyCausalLM(vocab_size=16, d_model=16, n_heads=2, n_layers=1)
    ids = torch.randint(0, 16, (2, 6))
    labels = torch.full((2, 6), IGNORE)
    loss = masked_loss(model(ids), labels)
    assert float(loss.detach()) == 0.0
    loss.backward()  # still differentiable


def test_loss_ignores_context_positions():
    torch.manual_seed(0)
    model = TinyCausalLM(vocab_size=16, d_model=16, n_heads=2, n_layers=1)
    ids = torch.randint(0, 16, (1, 8))
    supervised = torch.full((1, 8), IGNORE)
    supervised[0, -1] = int(ids[0, -1])
    logits = model(ids)
    loss_a = masked_loss(logits, supervised)
    # scrambling logits at ignored positions must not move the loss
    scrambled = logits.detach().clone()
    scrambled[0, :-2, :] = torch.randn_like(scrambled[0, :-2, :])
    loss_b = masked_loss(scrambled, supervised)
    assert torch.isclose(loss_a.detach(), loss_b)
    assert torch.isfinite(loss_a)


def test_pad_batch_pads_labels_with_ignore():
    rows = [TokenLabelRow([1, 2, 3], [IGNORE, 2, 3]),
            TokenLabelRow([4], [4])]
    ids, labels = pad_batch(rows)
    assert ids.shape == (2, 3)
    assert labels[1, 1] == IGNORE and labels[1, 2] == IGNORE


# -- adapter layers --------------------------------------------------------------------

def test_lora_only_adapter_params_trainable():
    model = apply_lora(TinyCausalLM(vocab_size=32, d_model=16, n_heads=2,
                                    n_layers=2), rank=2)
    trainable = list(lora_parameters(model))
    assert trainable
    assert all("lora_" in name for name, p in model.named_parameters()
               if p.requires_grad)
    state = lora_state_dict(model)
    assert state and all("lora_" in k for k in state)


def test_fresh_lora_is_identity_delta():
    torch.manual_seed(1)
    base = TinyCausalLM(vocab_size=32, d_model=16, n_heads=2, n_layers=1)
    ids = torch.randint(0, 32, (1, 5))
    before = base(ids)
    after = apply_lora(base, rank=2)(ids)
    assert torch.allclose(before, after)  # B starts at zero


# -- training runs --------------------------------------------------------------------

def test_train_selection_adapter_writes_artifact_and_metrics(tmp_path):
    dataset = tmp_path / "sel.jsonl"
    write_dataset(dataset, [selection_instance(i=i) for i in range(8)])
    run = TrainRun(adapter_id="sel:filesystem", dataset=dataset,
                   output=tmp_path / "adapters" / "sel_filesystem.pt",
                   hyperparameters=Hyperparameters(epochs=2, d_model=32))
    metrics = train(run)
    assert run.output.exists()
    saved = torch.load(run.output, weights_only=False)
    assert saved["adapter_id"] == "sel:filesystem"
    assert saved["state"]
    report = json.loads(run.output.with_suffix(".metrics.json").read_text())
    assert report["final_train_loss"] == metrics["final_train_loss"]
    assert len(metrics["epoch_train_losses"]) == 2
    assert all(l == l and l != float("inf") for l in metrics["epoch_train_losses"])
    assert "validation_loss" in metrics


def test_train_scope_mismatch_raises(tmp_path):
    dataset = tmp_path / "mixed.jsonl"
    write_dataset(dataset, [argument_instance(tool="read_file"),
                            argument_instance(tool="write_file", i=1)])
    run = TrainRun(adapter_id="arg:filesystem:read_file", dataset=dataset,
                   output=tmp_path / "a.pt")
    with pytest.raises(ScopeMismatchError):
        train(run)


def test_train_empty_dataset_fails(tmp_path):
    dataset = tmp_path / "empty.jsonl"
    dataset.write_text("")
    with pytest.raises(TrainingFailure):
        train(TrainRun(adapter_id="sel:filesystem", dataset=dataset,
                       output=tmp_path / "a.pt"))


def test_build_rows_selection_supervises_only_tool_name():
    instances = [Instance.from_dict(selection_instance(i=i)) for i in range(3)]
    tokenizer = WordTokenizer.fit([i.full_text() for i in instances])
    for instance, row in zip(instances, build_rows(instances, tokenizer)):
        supervised = tokenizer.decode(
            [row.input_ids[i] for i in row.supervised_positions()])
        assert instance.tool in supervised
        assert "{" not in supervised  # nothing from any arguments object
