"""Text encoders: pooled fixed-size representations from three families.

* ``toy`` — deterministic hashed character n-grams, used by the test suite
  and for fast desk-scale experiments. No external resources.
* ``recurrent`` — BiLSTM/BiGRU over a static word-embedding table
  (loaded from a plain-text vector file, or randomly initialized).
* ``transformer`` — adapter over a pretrained backbone resolved from an
  opaque identifier; requires the optional ``transformer`` extra.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigurationError

FAMILIES = ("transformer", "recurrent", "toy")
RECURRENT_CELLS = ("bilstm", "bigru")
EMBEDDING_SOURCES = ("glove", "fasttext", "random")


@dataclass(frozen=True)
class EncoderConfig:
    """Validated encoder selection; family-specific fields must match the family.

    ``backbone_id`` is an opaque resource identifier: a model-hub name or
    local path for the transformer family, the word-vector file path for
    recurrent glove/fasttext sources. ``hash_seed`` seeds the toy feature
    hash so toy vectors are reproducible across processes.
    """

    family: str
    backbone_id: str | None = None
    max_length: int = 128
    hidden_dim: int | None = None
    recurrent_cell: str | None = None
    embedding_source: str | None = None
    embedding_dim: int = 300
    hash_seed: int = 0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigurationError(
                f"unknown encoder family '{self.family}' (expected one of {FAMILIES})"
            )
        if self.max_length < 1:
            raise ConfigurationError("max_length must be >= 1")
        if self.hidden_dim is not None and self.hidden_dim < 1:
            raise ConfigurationError("hidden_dim must be >= 1")

        def forbid(name: str):
            if getattr(self, name) is not None:
                raise ConfigurationError(
                    f"field '{name}' does not apply to encoder family '{self.family}'"
                )

        if self.family == "toy":
            if self.hidden_dim is None:
                raise ConfigurationError("toy encoder requires hidden_dim")
            forbid("backbone_id")
            forbid("recurrent_cell")
            forbid("embedding_source")
        elif self.family == "recurrent":
            if self.hidden_dim is None:
                raise ConfigurationError("recurrent encoder requires hidden_dim")
            if self.hidden_dim % 2 != 0:
                raise ConfigurationError(
                    "recurrent hidden_dim must be even (two directions are concatenated)"
                )
            if self.recurrent_cell not in RECURRENT_CELLS:
                raise ConfigurationError(
                    f"recurrent_cell must be one of {RECURRENT_CELLS}, "
                    f"got {self.recurrent_cell!r}"
                )
            if self.embedding_source not in EMBEDDING_SOURCES:
                raise ConfigurationError(
                    f"embedding_source must be one of {EMBEDDING_SOURCES}, "
                    f"got {self.embedding_source!r}"
                )
            if self.embedding_dim < 1:
                raise ConfigurationError("embedding_dim must be >= 1")
            if self.embedding_source != "random" and not self.backbone_id:
                raise ConfigurationError(
                    f"embedding_source '{self.embedding_source}' requires backbone_id "
                    "(path to a word-vector file)"
                )
            if self.embedding_source == "random" and self.backbone_id:
                raise ConfigurationError(
                    "embedding_source 'random' takes no backbone_id"
                )
        else:  # transformer
            if not self.backbone_id:
                raise ConfigurationError("transformer encoder requires backbone_id")
            forbid("recurrent_cell")
            forbid("embedding_source")

    def to_dict(self) -> dict:
        out = {"family": self.family, "max_length": self.max_length}
        if self.backbone_id is not None:
            out["backbone_id"] = self.backbone_id
        if self.hidden_dim is not None:
            out["hidden_dim"] = self.hidden_dim
        if self.family == "recurrent":
            out["recurrent_cell"] = self.recurrent_cell
            out["embedding_source"] = self.embedding_source
            out["embedding_dim"] = self.embedding_dim
        if self.family == "toy":
            out["hash_seed"] = self.hash_seed
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "EncoderConfig":
        return cls(**data)


@dataclass(frozen=True)
class EncodedBatch:
    """Pooled vectors (B x hidden_dim) plus per-item effective token counts."""

    vectors: np.ndarray
    attention_lengths: np.ndarray

    def __post_init__(self):
        vectors = np.asarray(self.vectors, dtype=np.float64)
        lengths = np.asarray(self.attention_lengths, dtype=np.int64)
        if vectors.ndim != 2:
            raise ConfigurationError("EncodedBatch.vectors must be 2-D")
        if lengths.shape != (vectors.shape[0],):
            raise ConfigurationError(
                "attention_lengths must have one entry per batch item"
            )
        if vectors.size and not np.isfinite(vectors).all():
            raise ConfigurationError("EncodedBatch.vectors contains NaN or Inf")
        vectors.flags.writeable = False
        lengths.flags.writeable = False
        object.__setattr__(self, "vectors", vectors)
        object.__setattr__(self, "attention_lengths", lengths)

    @property
    def batch_size(self) -> int:
        return self.vectors.shape[0]

    @property
    def hidden_dim(self) -> int:
        return self.vectors.shape[1]


def build_trunk(config: EncoderConfig, seed: int = 0, corpus=None):
    """Instantiate the encoder trunk for a family.

    The recurrent family fits its vocabulary on ``corpus`` (normally the
    training texts). The transformer family resolves its backbone now and
    raises ConfigurationError if it cannot.
    """
    if config.family == "toy":
        from .toy import ToyTrunk

        return ToyTrunk(config)
    if config.family == "recurrent":
        from .recurrent import RecurrentTrunk

        return RecurrentTrunk.build(config, corpus or [], seed=seed)
    from .transformer import TransformerTrunk

    return TransformerTrunk(config)


def tokenize_truncate(text: str, config: EncoderConfig, vocab=None) -> np.ndarray:
    """Token ids for one text, truncated and padded to exactly max_length.

    Token granularity is per family: codepoints for toy, whitespace words
    for recurrent (requires a fitted vocabulary), the backbone's subword
    tokenizer for transformers. Id 0 is padding for toy/recurrent.
    """
    if config.family == "toy":
        from .toy import codepoint_ids

        return codepoint_ids(text, config.max_length)
    if config.family == "recurrent":
        if vocab is None:
            raise ConfigurationError(
                "recurrent tokenization requires a fitted vocabulary "
                "(build one via build_trunk or encoders.embeddings.Vocabulary)"
            )
        return vocab.token_ids(text, config.max_length)
    from .transformer import transformer_token_ids

    return transformer_token_ids(text, config)


def encode(texts, config: EncoderConfig, trunk=None) -> EncodedBatch:
    """Encode a batch of texts into pooled vectors.

    Pass a prebuilt ``trunk`` for the recurrent family to control which
    corpus the vocabulary was fitted on; without one, the vocabulary is
    fitted on ``texts`` themselves (deterministic but call-local).
    """
    if trunk is None:
        trunk = build_trunk(config, seed=0, corpus=list(texts))
    return trunk.encode(list(texts))
