"""Shared test utilities: synthetic splits, random matrices, oracles."""

from __future__ import annotations

import numpy as np

from hatefuse.data import DatasetSplit, Sample
from hatefuse.ensemble import PredictionMatrix
from hatefuse.schema import (
    SEVERITY_SCHEMA,
    TARGET_SCHEMA,
    TYPE_SCHEMA,
)

CLASS_MARKERS = ["qxje", "wvko", "zrfu", "ympa", "tbsn", "gldc"]


def separable_split(n: int, name: str = "train", tasks=("type", "severity", "target")) -> DatasetSplit:
    """Synthetic split whose three label spaces are consistent functions of the text.

    Sample i belongs to base class i % 6; a class-unique marker token makes
    the classes linearly separable under hashed n-gram features.
    """
    samples = []
    for i in range(n):
        klass = i % 6
        marker = CLASS_MARKERS[klass]
        text = f"{marker} fill{i % 7} {marker}{marker}"
        gold = {}
        if "type" in tasks:
            gold["type"] = TYPE_SCHEMA.labels[klass]
        if "severity" in tasks:
            gold["severity"] = SEVERITY_SCHEMA.labels[klass % 3]
        if "target" in tasks:
            gold["target"] = TARGET_SCHEMA.labels[klass % 5]
        samples.append(Sample(id=f"s{i:04d}", text=text, gold=gold))
    return DatasetSplit(name=name, samples=tuple(samples))


def random_simplex_rows(rng: np.random.Generator, n: int, c: int) -> np.ndarray:
    raw = rng.random((n, c)) + 1e-9
    return raw / raw.sum(axis=1, keepdims=True)


def make_matrix(
    probs: np.ndarray,
    model_id: str = "m",
    task_id: str = "type",
    labels=None,
    fingerprint: str = "",
) -> PredictionMatrix:
    probs = np.asarray(probs, dtype=np.float64)
    n, c = probs.shape
    if labels is None:
        labels = tuple(f"L{i}" for i in range(c))
    return PredictionMatrix(
        model_id=model_id,
        task_id=task_id,
        labels=tuple(labels),
        sample_ids=tuple(f"id{i}" for i in range(n)),
        probs=probs,
        fingerprint=fingerprint,
    )


def micro_f1_oracle(pred: list[str], gold: list[str], labels) -> float:
    """Brute-force pooled TP/FP/FN tally, independent of the implementation."""
    tp = {label: 0 for label in labels}
    fp = {label: 0 for label in labels}
    fn = {label: 0 for label in labels}
    for p, g in zip(pred, gold):
        if p == g:
            tp[g] += 1
        else:
            fp[p] += 1
            fn[g] += 1
    tp_sum = sum(tp.values())
    fp_sum = sum(fp.values())
    fn_sum = sum(fn.values())
    return 2 * tp_sum / (2 * tp_sum + fp_sum + fn_sum)


def onehot_matrix_for_split(split, task, schema, model_id="gold-onehot", fingerprint=""):
    """Prediction matrix that reproduces the split's gold labels exactly."""
    probs = np.zeros((len(split), schema.num_classes))
    for row, sample in enumerate(split.samples):
        probs[row, schema.index_of(sample.gold[task])] = 1.0
    return PredictionMatrix(
        model_id=model_id,
        task_id=task,
        labels=schema.labels,
        sample_ids=tuple(split.ids()),
        probs=probs,
        fingerprint=fingerprint,
    )
