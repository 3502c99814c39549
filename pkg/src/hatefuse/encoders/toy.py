"""Deterministic toy encoder: hashed character n-grams.

Character 1- to 3-grams of the truncated text are FNV-hashed into
``hidden_dim`` buckets, counted, and L2-normalized. Pure function of
(text, hidden_dim, max_length, hash_seed): bit-identical across processes,
no learned parameters, no external resources.
"""

from __future__ import annotations

import numpy as np

from .. import kernels
from . import EncodedBatch, EncoderConfig

NGRAM_MIN = 1
NGRAM_MAX = 3


def codepoint_ids(text: str, max_length: int) -> np.ndarray:
    """Codepoint tokens shifted by +1 so id 0 is reserved for padding."""
    ids = np.zeros(max_length, dtype=np.int64)
    clipped = text[:max_length]
    if clipped:
        ids[: len(clipped)] = np.fromiter(
            (ord(ch) + 1 for ch in clipped), dtype=np.int64, count=len(clipped)
        )
    return ids


def hash_features(texts: list[str], config: EncoderConfig) -> np.ndarray:
    """(B, hidden_dim) L2-normalized n-gram count vectors."""
    dim = config.hidden_dim
    if not texts:
        return np.zeros((0, dim), dtype=np.float64)
    clipped = [t[: config.max_length] for t in texts]
    offsets = np.zeros(len(clipped) + 1, dtype=np.int64)
    offsets[1:] = np.cumsum([len(t) for t in clipped])
    codes = np.fromiter(
        (ord(ch) for t in clipped for ch in t), dtype=np.int64, count=int(offsets[-1])
    )
    counts = kernels.ngram_hash_counts(
        codes, offsets, dim, config.hash_seed, NGRAM_MIN, NGRAM_MAX
    )
    norms = np.sqrt((counts * counts).sum(axis=1))
    norms[norms == 0.0] = 1.0
    return counts / norms[:, None]


class ToyTrunk:
    """Frozen feature-hash trunk; nothing to train."""

    static = True

    def __init__(self, config: EncoderConfig):
        if config.family != "toy":
            raise ValueError("ToyTrunk requires a toy-family config")
        self.config = config
        self.out_dim = config.hidden_dim

    def encode(self, texts: list[str]) -> EncodedBatch:
        vectors = hash_features(texts, self.config)
        lengths = np.array(
            [min(len(t), self.config.max_length) for t in texts], dtype=np.int64
        )
        return EncodedBatch(vectors=vectors, attention_lengths=lengths)

    def forward_train(self, texts: list[str]):
        return self.encode(texts).vectors, None

    def backward(self, d_vectors, cache) -> dict:
        return {}

    def params(self) -> dict:
        return {}

    def state_arrays(self) -> dict:
        return {}

    def state_meta(self) -> dict:
        return {}
