"""Probability-matrix fusion: soft, hard, and weighted voting.

Members must be strictly aligned (same task, same label order, same sample
order); nothing is silently reordered. Soft voting is the unweighted
arithmetic mean of member probabilities, weighted voting a convex
combination, hard voting a majority vote over member argmaxes with an
explicit tie rule.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import AlignmentError, FingerprintError, ValidationError

SIMPLEX_TOL = 1e-6
TIE_BREAKS = ("soft_fallback", "lowest_index")
METHODS = ("soft", "hard", "weighted")


@dataclass(frozen=True)
class PredictionMatrix:
    """N x C class-probability table from one model for one task."""

    model_id: str
    task_id: str
    labels: tuple[str, ...]
    sample_ids: tuple[str, ...]
    probs: np.ndarray
    fingerprint: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "sample_ids", tuple(self.sample_ids))
        probs = np.array(self.probs, dtype=np.float64)
        if probs.ndim != 2:
            raise ValidationError("probs must be a 2-D matrix")
        if probs.shape != (len(self.sample_ids), len(self.labels)):
            raise ValidationError(
                f"probs shape {probs.shape} does not match "
                f"{len(self.sample_ids)} samples x {len(self.labels)} labels"
            )
        if len(set(self.sample_ids)) != len(self.sample_ids):
            raise ValidationError("sample_ids must be unique")
        if probs.size:
            if not np.isfinite(probs).all():
                raise ValidationError("probs contains NaN or Inf")
            if probs.min() < -SIMPLEX_TOL or probs.max() > 1.0 + SIMPLEX_TOL:
                raise ValidationError("probabilities must lie in [0, 1]")
            sums = probs.sum(axis=1)
            worst = np.abs(sums - 1.0).max()
            if worst > SIMPLEX_TOL:
                raise ValidationError(
                    f"probability rows must sum to 1 within {SIMPLEX_TOL} "
                    f"(worst deviation {worst:.3e})"
                )
        probs.flags.writeable = False
        object.__setattr__(self, "probs", probs)

    @property
    def n_samples(self) -> int:
        return len(self.sample_ids)


@dataclass(frozen=True)
class EnsembleSpec:
    """Fusion recipe: method, ordered member ids, weights for weighted voting."""

    method: str
    members: tuple[str, ...]
    weights: tuple[float, ...] | None = None
    tie_break: str = "soft_fallback"

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValidationError(f"method must be one of {METHODS}")
        object.__setattr__(self, "members", tuple(self.members))
        if self.weights is not None:
            object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if self.tie_break not in TIE_BREAKS:
            raise ValidationError(f"tie_break must be one of {TIE_BREAKS}")
        if self.method == "weighted":
            if self.weights is None:
                raise ValidationError("weighted voting requires weights")
            _check_weights(self.weights, len(self.members))
        elif self.weights is not None:
            raise ValidationError(f"{self.method} voting takes no weights")


def _check_weights(weights: Sequence[float], n_members: int) -> None:
    if len(weights) != n_members:
        raise ValidationError(
            f"{len(weights)} weights for {n_members} members"
        )
    if any(w < 0 for w in weights):
        raise ValidationError("weights must be nonnegative")
    total = float(sum(weights))
    if abs(total - 1.0) > SIMPLEX_TOL:
        raise ValidationError(
            f"weights must sum to 1 within {SIMPLEX_TOL}, got {total!r}"
        )


def check_aligned(matrices: Sequence[PredictionMatrix]) -> None:
    """Raise AlignmentError on the first task/label/sample mismatch."""
    if len(matrices) < 2:
        raise ValidationError("fusion requires at least 2 member matrices")
    first = matrices[0]
    for other in matrices[1:]:
        if other.task_id != first.task_id:
            raise AlignmentError(
                f"task mismatch: '{first.model_id}' predicts '{first.task_id}' "
                f"but '{other.model_id}' predicts '{other.task_id}'"
            )
        if other.labels != first.labels:
            raise AlignmentError(
                f"label-order mismatch between '{first.model_id}' and "
                f"'{other.model_id}': {list(first.labels)} vs {list(other.labels)}"
            )
        if other.n_samples != first.n_samples:
            raise AlignmentError(
                f"sample-count mismatch: {first.n_samples} vs {other.n_samples}"
            )
        if other.sample_ids != first.sample_ids:
            for a, b in zip(first.sample_ids, other.sample_ids):
                if a != b:
                    raise AlignmentError(
                        f"sample-order mismatch between '{first.model_id}' and "
                        f"'{other.model_id}': first differing id '{a}' vs '{b}'"
                    )
        if first.fingerprint and other.fingerprint and first.fingerprint != other.fingerprint:
            raise FingerprintError(
                f"data-lineage fingerprint mismatch between '{first.model_id}' "
                f"and '{other.model_id}'"
            )


def _member_list(matrices: Sequence[PredictionMatrix]) -> str:
    return "+".join(m.model_id for m in matrices)


def soft_vote(matrices: Sequence[PredictionMatrix]) -> PredictionMatrix:
    """Unweighted arithmetic mean of member probabilities."""
    check_aligned(matrices)
    first = matrices[0]
    mean = np.mean([m.probs for m in matrices], axis=0)
    return PredictionMatrix(
        model_id=f"soft({_member_list(matrices)})",
        task_id=first.task_id,
        labels=first.labels,
        sample_ids=first.sample_ids,
        probs=mean,
        fingerprint=first.fingerprint,
        meta={"method": "soft", "members": [m.model_id for m in matrices]},
    )


def weighted_vote(
    matrices: Sequence[PredictionMatrix], weights: Sequence[float]
) -> PredictionMatrix:
    """Convex combination of member probabilities; weights must sum to 1."""
    check_aligned(matrices)
    _check_weights(weights, len(matrices))
    first = matrices[0]
    fused = np.zeros_like(first.probs)
    for weight, matrix in zip(weights, matrices):
        fused = fused + weight * matrix.probs
    return PredictionMatrix(
        model_id=f"weighted({_member_list(matrices)})",
        task_id=first.task_id,
        labels=first.labels,
        sample_ids=first.sample_ids,
        probs=fused,
        fingerprint=first.fingerprint,
        meta={
            "method": "weighted",
            "members": [m.model_id for m in matrices],
            "weights": [float(w) for w in weights],
        },
    )


def argmax_labels(matrix: PredictionMatrix) -> list[str]:
    """Per-row maximal label; exact ties go to the lowest label index."""
    if matrix.n_samples == 0:
        return []
    return [matrix.labels[i] for i in np.argmax(matrix.probs, axis=1)]


def hard_vote(
    matrices: Sequence[PredictionMatrix], tie_break: str = "soft_fallback"
) -> list[str]:
    """Majority vote over member argmax labels.

    Ties are resolved by ``soft_fallback`` (argmax of the mean probabilities)
    or ``lowest_index`` (smallest label index among the tied labels).
    """
    if tie_break not in TIE_BREAKS:
        raise ValidationError(f"tie_break must be one of {TIE_BREAKS}")
    check_aligned(matrices)
    first = matrices[0]
    votes = np.zeros((first.n_samples, len(first.labels)), dtype=np.int64)
    for matrix in matrices:
        if matrix.n_samples:
            votes[np.arange(matrix.n_samples), np.argmax(matrix.probs, axis=1)] += 1
    mean = np.mean([m.probs for m in matrices], axis=0)
    out = []
    for row in range(first.n_samples):
        top = votes[row].max()
        tied = np.flatnonzero(votes[row] == top)
        if len(tied) == 1 or tie_break == "lowest_index":
            out.append(first.labels[tied[0]])
        else:
            tied_scores = mean[row, tied]
            out.append(first.labels[tied[int(np.argmax(tied_scores))]])
    return out


def fuse(spec: EnsembleSpec, matrices: Sequence[PredictionMatrix]):
    """Apply an EnsembleSpec; hard voting returns labels, others a matrix."""
    ids = [m.model_id for m in matrices]
    if list(spec.members) != ids:
        raise ValidationError(
            f"ensemble members {list(spec.members)} do not match the supplied "
            f"matrices {ids}"
        )
    if spec.method == "soft":
        return soft_vote(matrices)
    if spec.method == "weighted":
        return weighted_vote(matrices, spec.weights)
    return hard_vote(matrices, tie_break=spec.tie_break)
