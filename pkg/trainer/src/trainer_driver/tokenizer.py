"""Whitespace-preserving word tokenizer with character offset mapping.

Every character of the input lands in exactly one token (words,
punctuation, and whitespace runs are all tokens), so offsets cover the
text contiguously — a precondition of the span-to-label conversion.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

_TOKEN_RE = re.compile(r"\w+|\s+|[^\w\s]")

PAD = "<pad>"
UNK = "<unk>"


def split_with_offsets(text: str) -> List[Tuple[str, Tuple[int, int]]]:
    return [(m.group(0), (m.start(), m.end())) for m in _TOKEN_RE.finditer(text)]


@dataclass
class WordTokenizer:
    """Vocabulary over token strings; ids are dense, 0=pad, 1=unk."""

    token_to_id: Dict[str, int] = field(
        default_factory=lambda: {PAD: 0, UNK: 1})

    @classmethod
    def fit(cls, texts: Sequence[str]) -> "WordTokenizer":
        tokenizer = cls()
        for text in texts:
            for token, _ in split_with_offsets(text):
                if token not in tokenizer.token_to_id:
                    tokenizer.token_to_id[token] = len(tokenizer.token_to_id)
        return tokenizer

    @property
    def vocab_size(self) -> int:
        return len(self.token_to_id)

    def encode(self, text: str) -> Tuple[List[int], List[Tuple[int, int]]]:
        """Returns (token ids, per-token [start, end) character offsets)."""
        ids, offsets = [], []
        for token, span in split_with_offsets(text):
            ids.append(self.token_to_id.get(token, self.token_to_id[UNK]))
            offsets.append(span)
        return ids, offsets

    def decode(self, ids: Sequence[int]) -> str:
        id_to_token = {i: t for t, i in self.token_to_id.items()}
        return "".join(id_to_token.get(i, UNK) for i in ids)
