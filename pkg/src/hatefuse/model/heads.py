"""Classification heads: one affine layer + softmax per task."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..encoders import EncodedBatch
from ..errors import ConfigurationError


@dataclass(frozen=True)
class HeadConfig:
    task_id: str
    num_classes: int

    def __post_init__(self):
        if self.num_classes < 2:
            raise ConfigurationError(
                f"head for task '{self.task_id}' needs num_classes >= 2, "
                f"got {self.num_classes}"
            )

    def to_dict(self) -> dict:
        return {"task_id": self.task_id, "num_classes": self.num_classes}


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise stable softmax."""
    shifted = logits - logits.max(axis=1, keepdims=True)
    expd = np.exp(shifted)
    return expd / expd.sum(axis=1, keepdims=True)


class ClassifierHead:
    """Affine map from pooled vectors to class logits.

    Weights start at zero: the head is a convex single layer, and zero
    initialization makes untrained outputs exactly uniform.
    """

    def __init__(self, config: HeadConfig, input_dim: int):
        self.config = config
        self.input_dim = input_dim
        self.weight = np.zeros((input_dim, config.num_classes))
        self.bias = np.zeros(config.num_classes)

    def logits(self, vectors: np.ndarray) -> np.ndarray:
        if vectors.shape[1] != self.input_dim:
            raise ConfigurationError(
                f"head '{self.config.task_id}' expects vectors of width "
                f"{self.input_dim}, got {vectors.shape[1]}"
            )
        return vectors @ self.weight + self.bias

    def proba(self, vectors: np.ndarray) -> np.ndarray:
        return softmax(self.logits(vectors))


def forward_single(batch: EncodedBatch, head: ClassifierHead) -> np.ndarray:
    """(B, C) probability rows for one task head; rows lie on the simplex."""
    return head.proba(batch.vectors)
