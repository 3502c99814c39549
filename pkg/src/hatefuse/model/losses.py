"""Cross-entropy losses and the weighted multitask combination.

The multitask objective is a weighted sum of per-task batch-mean
cross-entropies: alpha weights the type head, beta the severity head,
gamma the target head. The value is linear in (alpha, beta, gamma).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from ..errors import ValidationError
from ..schema import TASK_SEVERITY, TASK_TARGET, TASK_TYPE

_PROB_FLOOR = 1e-12
_SIMPLEX_TOL = 1e-6


@dataclass(frozen=True)
class LossWeights:
    """Per-task loss weights; all finite and nonnegative, at least one > 0."""

    alpha: float = 1.0
    beta: float = 1.0
    gamma: float = 1.0

    def __post_init__(self):
        values = (self.alpha, self.beta, self.gamma)
        if not all(math.isfinite(v) for v in values):
            raise ValidationError("loss weights must be finite")
        if any(v < 0 for v in values):
            raise ValidationError("loss weights must be nonnegative")
        if not any(v > 0 for v in values):
            raise ValidationError("at least one loss weight must be positive")

    def as_map(self) -> dict[str, float]:
        return {
            TASK_TYPE: self.alpha,
            TASK_SEVERITY: self.beta,
            TASK_TARGET: self.gamma,
        }

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "beta": self.beta, "gamma": self.gamma}


def _check_simplex(vec: np.ndarray, name: str) -> np.ndarray:
    vec = np.asarray(vec, dtype=np.float64)
    if vec.ndim != 1:
        raise ValidationError(f"{name} must be a 1-D probability vector")
    if np.any(vec < 0.0) or np.any(vec > 1.0):
        raise ValidationError(f"{name} entries must lie in [0, 1]")
    if abs(float(vec.sum()) - 1.0) > _SIMPLEX_TOL:
        raise ValidationError(f"{name} must sum to 1 within {_SIMPLEX_TOL}")
    return vec


@dataclass(frozen=True)
class MultitaskPrediction:
    """Per-sample probability triple over the three task label spaces."""

    type_probs: np.ndarray
    severity_probs: np.ndarray
    target_probs: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self, "type_probs", _check_simplex(self.type_probs, "type_probs")
        )
        object.__setattr__(
            self, "severity_probs", _check_simplex(self.severity_probs, "severity_probs")
        )
        object.__setattr__(
            self, "target_probs", _check_simplex(self.target_probs, "target_probs")
        )

    def probs_for(self, task: str) -> np.ndarray:
        return {
            TASK_TYPE: self.type_probs,
            TASK_SEVERITY: self.severity_probs,
            TASK_TARGET: self.target_probs,
        }[task]


def cross_entropy(probs: np.ndarray, gold: Sequence[int]) -> float:
    """Batch-mean negative log-likelihood of the gold classes."""
    probs = np.asarray(probs, dtype=np.float64)
    gold = np.asarray(gold, dtype=np.int64)
    if probs.shape[0] != gold.shape[0]:
        raise ValidationError(
            f"{probs.shape[0]} prediction rows but {gold.shape[0]} gold labels"
        )
    if probs.shape[0] == 0:
        raise ValidationError("cross_entropy needs at least one sample")
    if gold.min() < 0 or gold.max() >= probs.shape[1]:
        raise ValidationError("gold class index out of range")
    picked = probs[np.arange(len(gold)), gold]
    return float(-np.log(np.maximum(picked, _PROB_FLOOR)).mean())


def mtl_loss(
    predictions: Sequence[MultitaskPrediction],
    gold: Mapping[str, Sequence[int]],
    weights: LossWeights,
) -> float:
    """alpha*CE_type + beta*CE_severity + gamma*CE_target over the batch."""
    if not predictions:
        raise ValidationError("mtl_loss needs at least one prediction")
    for task in (TASK_TYPE, TASK_SEVERITY, TASK_TARGET):
        if task not in gold:
            raise ValidationError(
                f"multitask loss requires gold labels for task '{task}'"
            )
    total = 0.0
    for task, weight in weights.as_map().items():
        stacked = np.stack([p.probs_for(task) for p in predictions])
        total += weight * cross_entropy(stacked, gold[task])
    return float(total)


def softmax_xent_grad(logits: np.ndarray, gold: Sequence[int]):
    """(loss, dlogits) for mean cross-entropy straight from logits."""
    gold = np.asarray(gold, dtype=np.int64)
    n = logits.shape[0]
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_z = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    log_probs = shifted - log_z
    loss = float(-log_probs[np.arange(n), gold].mean())
    dlogits = np.exp(log_probs)
    dlogits[np.arange(n), gold] -= 1.0
    dlogits /= n
    return loss, dlogits
