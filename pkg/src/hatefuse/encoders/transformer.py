"""Adapter over pretrained transformer backbones (optional extra).

Backbone identifiers are opaque strings handed to the hub resolver; local
directory paths work offline. Pooling is the first-token position of the
last hidden layer. torch/transformers import lazily so the rest of the
toolkit has no heavyweight dependencies.
"""

from __future__ import annotations

import os

import numpy as np

from ..errors import ConfigurationError
from . import EncodedBatch, EncoderConfig

CACHE_ENV = "HATEFUSE_CACHE_DIR"


def _import_torch_stack():
    try:
        import torch
        import transformers
    except ImportError as exc:
        raise ConfigurationError(
            "the transformer encoder family requires the optional "
            "'transformer' extra (pip install hatefuse[transformer]): "
            f"{exc}"
        ) from None
    return torch, transformers


def resolve_backbone(backbone_id: str):
    """Load (tokenizer, model) for a backbone id; failure is a config error."""
    torch, transformers = _import_torch_stack()
    cache_dir = os.environ.get(CACHE_ENV) or None
    try:
        tokenizer = transformers.AutoTokenizer.from_pretrained(
            backbone_id, cache_dir=cache_dir
        )
        model = transformers.AutoModel.from_pretrained(backbone_id, cache_dir=cache_dir)
    except Exception as exc:
        raise ConfigurationError(
            f"backbone '{backbone_id}' could not be resolved: {exc}"
        ) from None
    model.eval()
    return tokenizer, model


def transformer_token_ids(text: str, config: EncoderConfig) -> np.ndarray:
    tokenizer, _ = resolve_backbone(config.backbone_id)
    encoded = tokenizer(
        text, truncation=True, padding="max_length", max_length=config.max_length
    )
    return np.asarray(encoded["input_ids"], dtype=np.int64)


class TransformerTrunk:
    """Eval-mode feature extractor; fine-tuning runs through the torch backend."""

    static = True

    def __init__(self, config: EncoderConfig):
        if config.family != "transformer":
            raise ConfigurationError("TransformerTrunk requires a transformer config")
        self.config = config
        self.tokenizer, self.model = resolve_backbone(config.backbone_id)
        backbone_dim = int(self.model.config.hidden_size)
        if config.hidden_dim is not None and config.hidden_dim != backbone_dim:
            raise ConfigurationError(
                f"hidden_dim {config.hidden_dim} does not match backbone "
                f"hidden size {backbone_dim}"
            )
        self.out_dim = backbone_dim

    def encode(self, texts: list[str]) -> EncodedBatch:
        import torch

        if not texts:
            return EncodedBatch(
                vectors=np.zeros((0, self.out_dim)),
                attention_lengths=np.zeros(0, dtype=np.int64),
            )
        batch = self.tokenizer(
            list(texts),
            truncation=True,
            padding="max_length",
            max_length=self.config.max_length,
            return_tensors="pt",
        )
        with torch.no_grad():
            hidden = self.model(**batch).last_hidden_state
        pooled = hidden[:, 0, :].numpy().astype(np.float64)
        lengths = batch["attention_mask"].sum(dim=1).numpy().astype(np.int64)
        return EncodedBatch(vectors=pooled, attention_lengths=lengths)

    def forward_train(self, texts):
        raise ConfigurationError(
            "transformer trunks train through the torch backend, not the "
            "numpy training loop"
        )

    def backward(self, d_vectors, cache):
        raise ConfigurationError("transformer trunks have no numpy backward pass")

    def params(self) -> dict:
        return {}

    def state_arrays(self) -> dict:
        return {}

    def state_meta(self) -> dict:
        return {}
