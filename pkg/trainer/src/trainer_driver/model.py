"""Tiny causal language model with hand-rolled low-rank adapter layers.

Smoke-scale stand-in for a real base model: token + position embeddings,
a couple of pre-norm transformer blocks with explicit q/k/v/o and MLP
linears so adapters can wrap them, and a tied-free LM head. Adapter
weights are the only trainable parameters once `apply_lora` runs.
"""

from __future__ import annotations

import math
from typing import Dict, Iterator

import torch
from torch import nn


class LoRALinear(nn.Module):
    """Frozen base linear plus a trainable low-rank delta (B @ A)."""

    def __init__(self, base: nn.Linear, rank: int, alpha: float = 16.0):
        super().__init__()
        self.base = base
        for p in self.base.parameters():
            p.requires_grad_(False)
        self.lora_a = nn.Parameter(torch.randn(rank, base.in_features) * 0.01)
        self.lora_b = nn.Parameter(torch.zeros(base.out_features, rank))
        self.scaling = alpha / rank

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        delta = (x @ self.lora_a.T) @ self.lora_b.T
        return self.base(x) + self.scaling * delta


class Block(nn.Module):
    def __init__(self, d_model: int, n_heads: int):
        super().__init__()
        self.n_heads = n_heads
        self.norm1 = nn.LayerNorm(d_model)
        self.q = nn.Linear(d_model, d_model)
        self.k = nn.Linear(d_model, d_model)
        self.v = nn.Linear(d_model, d_model)
        self.o = nn.Linear(d_model, d_model)
        self.norm2 = nn.LayerNorm(d_model)
        self.mlp_in = nn.Linear(d_model, 4 * d_model)
        self.mlp_out = nn.Linear(4 * d_model, d_model)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        batch, length, d_model = x.shape
        head_dim = d_model // self.n_heads
        h = self.norm1(x)

        def heads(t):
            return t.view(batch, length, self.n_heads, head_dim).transpose(1, 2)

        q, k, v = heads(self.q(h)), heads(self.k(h)), heads(self.v(h))
        scores = q @ k.transpose(-2, -1) / math.sqrt(head_dim)
        causal = torch.triu(torch.ones(length, length, dtype=torch.bool,
                                       device=x.device), diagonal=1)
        scores = scores.masked_fill(causal, float("-inf"))
        attended = (scores.softmax(dim=-1) @ v).transpose(1, 2)
        x = x + self.o(attended.reshape(batch, length, d_model))
        h = self.norm2(x)
        return x + self.mlp_out(torch.relu(self.mlp_in(h)))


class TinyCausalLM(nn.Module):
    def __init__(self, vocab_size: int, d_model: int = 64, n_heads: int = 2,
                 n_layers: int = 2, max_len: int = 1024):
        super().__init__()
        self.token_emb = nn.Embedding(vocab_size, d_model)
        self.pos_emb = nn.Embedding(max_len, d_model)
        self.blocks = nn.ModuleList(Block(d_model, n_heads) for _ in range(n_layers))
        self.norm = nn.LayerNorm(d_model)
        self.lm_head = nn.Linear(d_model, vocab_size)
        self.max_len = max_len

    def forward(self, input_ids: torch.Tensor) -> torch.Tensor:
        length = input_ids.shape[1]
        positions = torch.arange(length, device=input_ids.device)
        x = self.token_emb(input_ids) + self.pos_emb(positions)
        for block in self.blocks:
            x = block(x)
        return self.lm_head(self.norm(x))


LORA_TARGETS = ("q", "k", "v", "o", "mlp_in", "mlp_out")


def apply_lora(model: TinyCausalLM, rank: int) -> TinyCausalLM:
    """Freezes every base parameter and wraps the block linears in adapters."""
    for p in model.parameters():
        p.requires_grad_(False)
    for block in model.blocks:
        for name in LORA_TARGETS:
            setattr(block, name, LoRALinear(getattr(block, name), rank))
    return model


def lora_parameters(model: TinyCausalLM) -> Iterator[nn.Parameter]:
    return (p for p in model.parameters() if p.requires_grad)


def lora_state_dict(model: TinyCausalLM) -> Dict[str, torch.Tensor]:
    return {name: tensor for name, tensor in model.state_dict().items()
            if "lora_" in name}
