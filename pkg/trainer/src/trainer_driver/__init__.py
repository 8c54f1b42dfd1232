"""Char-span masks → token labels, and smoke-scale LoRA adapter training."""

from .labels import (
    IGNORE,
    Instance,
    OffsetMismatchError,
    TokenLabelRow,
    read_instances,
    read_rows,
    spans_to_token_labels,
    write_rows,
)
from .model import LoRALinear, TinyCausalLM, apply_lora, lora_parameters, lora_state_dict
from .tokenizer import WordTokenizer, split_with_offsets
from .trainer import (
    Hyperparameters,
    ScopeMismatchError,
    TrainRun,
    TrainingFailure,
    build_rows,
    check_scope,
    masked_loss,
    pad_batch,
    train,
)

__version__ = "0.1.0"
