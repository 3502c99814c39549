"""Micro-F1 evaluation, confusion matrices, and error reports.

Micro-F1 pools true positives / false positives / false negatives across
classes; for single-label multi-class predictions it equals accuracy. The
combined multitask score is a convex combination of per-task micro-F1
values whose weights default to equal and are echoed in every report.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .data import DatasetSplit, label_distribution
from .errors import ValidationError
from .schema import LabelSchema

WEIGHT_TOL = 1e-6
DEFAULT_RECALL_THRESHOLD = 0.5


def _check_pair(pred: Sequence[str], gold: Sequence[str], schema: LabelSchema):
    if len(pred) != len(gold):
        raise ValidationError(
            f"length mismatch: {len(pred)} predictions vs {len(gold)} gold labels"
        )
    if len(pred) == 0:
        raise ValidationError("evaluation needs at least one sample")
    pred_idx = np.array([schema.index_of(p) for p in pred], dtype=np.int64)
    gold_idx = np.array([schema.index_of(g) for g in gold], dtype=np.int64)
    return pred_idx, gold_idx


def confusion_matrix(
    pred: Sequence[str], gold: Sequence[str], schema: LabelSchema
) -> np.ndarray:
    """C x C counts; entry (i, j) counts gold label i predicted as label j."""
    pred_idx, gold_idx = _check_pair(pred, gold, schema)
    counts = np.zeros((schema.num_classes, schema.num_classes), dtype=np.int64)
    np.add.at(counts, (gold_idx, pred_idx), 1)
    return counts


def micro_f1(pred: Sequence[str], gold: Sequence[str], schema: LabelSchema) -> float:
    """F1 from pooled per-class TP/FP/FN counts."""
    counts = confusion_matrix(pred, gold, schema)
    tp = int(np.trace(counts))
    fp = int(counts.sum() - np.trace(counts))  # every miss is one FP and one FN
    fn = fp
    return 2 * tp / (2 * tp + fp + fn)


def weighted_micro_f1(
    per_task: Mapping[str, float], task_weights: Mapping[str, float]
) -> float:
    """Convex combination of per-task micro-F1 scores."""
    if set(per_task) != set(task_weights):
        raise ValidationError(
            f"task weights {sorted(task_weights)} do not cover exactly the "
            f"scored tasks {sorted(per_task)}"
        )
    weights = {t: float(w) for t, w in task_weights.items()}
    if any(w < 0 for w in weights.values()):
        raise ValidationError("task weights must be nonnegative")
    total = sum(weights.values())
    if abs(total - 1.0) > WEIGHT_TOL:
        raise ValidationError(
            f"task weights must sum to 1 within {WEIGHT_TOL}, got {total!r}"
        )
    return float(sum(weights[t] * per_task[t] for t in per_task))


def per_class_recall(
    pred: Sequence[str], gold: Sequence[str], schema: LabelSchema
) -> dict[str, float]:
    """Recall per gold class; classes with zero gold support are omitted."""
    counts = confusion_matrix(pred, gold, schema)
    support = counts.sum(axis=1)
    out = {}
    for i, label in enumerate(schema.labels):
        if support[i] > 0:
            out[label] = float(counts[i, i] / support[i])
    return out


def majority_baseline(
    split: DatasetSplit, task: str, train_split: DatasetSplit | None = None
) -> list[str]:
    """Predict the most frequent training label for every sample.

    Uses ``train_split`` for the frequency estimate when given, otherwise
    the split being predicted. Frequency ties go to the earlier label in
    first-seen order.
    """
    source = train_split if train_split is not None else split
    counts = label_distribution(source, task)
    top = max(counts.items(), key=lambda kv: kv[1])[0]
    return [top] * len(split)


@dataclass(frozen=True)
class MetricsReport:
    """Everything one evaluation run produced."""

    per_task_micro_f1: dict[str, float]
    weighted_micro_f1: float | None
    task_weights: dict[str, float] | None
    confusion: dict[str, np.ndarray]
    per_class_recall: dict[str, dict[str, float]]
    n_samples: int
    fingerprint: str = ""

    def to_json_doc(self) -> str:
        doc = {
            "n_samples": self.n_samples,
            "fingerprint": self.fingerprint,
            "per_task_micro_f1": self.per_task_micro_f1,
            "weighted_micro_f1": self.weighted_micro_f1,
            "task_weights": self.task_weights,
            "per_class_recall": self.per_class_recall,
            "confusion": {t: m.tolist() for t, m in self.confusion.items()},
        }
        return json.dumps(doc, ensure_ascii=False, sort_keys=True, indent=1) + "\n"


def compute_report(
    split: DatasetSplit,
    predictions: Mapping[str, Sequence[str]],
    schemas: Mapping[str, LabelSchema],
    task_weights: Mapping[str, float] | None = None,
    fingerprint: str = "",
) -> MetricsReport:
    """Score per-task label predictions against the split's gold labels.

    The combined weighted micro-F1 is emitted only for multi-head runs
    (more than one scored task); its weights default to equal.
    """
    scores: dict[str, float] = {}
    confusion: dict[str, np.ndarray] = {}
    recalls: dict[str, dict[str, float]] = {}
    for task, pred in predictions.items():
        schema = schemas[task]
        gold = []
        for sample in split.samples:
            if task not in sample.gold:
                raise ValidationError(
                    f"sample '{sample.id}' has no gold label for task '{task}'"
                )
            gold.append(sample.gold[task])
        scores[task] = micro_f1(list(pred), gold, schema)
        confusion[task] = confusion_matrix(list(pred), gold, schema)
        recalls[task] = per_class_recall(list(pred), gold, schema)

    combined = None
    weights_used = None
    if len(scores) > 1:
        if task_weights is None:
            weights_used = {t: 1.0 / len(scores) for t in scores}
        else:
            weights_used = {t: float(task_weights[t]) for t in scores}
        combined = weighted_micro_f1(scores, weights_used)
    return MetricsReport(
        per_task_micro_f1=scores,
        weighted_micro_f1=combined,
        task_weights=weights_used,
        confusion=confusion,
        per_class_recall=recalls,
        n_samples=len(split),
        fingerprint=fingerprint,
    )


def error_report(
    split: DatasetSplit,
    predictions: Mapping[str, Sequence[str]],
    k: int,
    schemas: Mapping[str, LabelSchema],
    recall_threshold: float = DEFAULT_RECALL_THRESHOLD,
) -> str:
    """Markdown document: misclassified examples and minority-class recall.

    Lists up to ``k`` errors per task and flags every class whose recall
    falls below ``recall_threshold``.
    """
    lines = ["# Error report", ""]
    for task, pred in predictions.items():
        schema = schemas[task]
        gold = [s.gold[task] for s in split.samples]
        lines.append(f"## Task: {task}")
        lines.append("")
        errors = [
            (sample, g, p)
            for sample, g, p in zip(split.samples, gold, pred)
            if g != p
        ]
        if not errors:
            lines.append("No misclassified samples.")
        else:
            lines.append(f"Misclassified {len(errors)} of {len(split)}; showing up to {k}:")
            lines.append("")
            lines.append("| id | text | gold | predicted |")
            lines.append("|---|---|---|---|")
            for sample, g, p in errors[:k]:
                text = sample.text.replace("|", "\\|")
                lines.append(f"| {sample.id} | {text} | {g} | {p} |")
        lines.append("")
        lines.append(f"### Per-class recall (flag threshold {recall_threshold})")
        lines.append("")
        lines.append("| label | support | recall | flag |")
        lines.append("|---|---|---|---|")
        counts = confusion_matrix(list(pred), gold, schema)
        support = counts.sum(axis=1)
        for i, label in enumerate(schema.labels):
            if support[i] == 0:
                lines.append(f"| {label} | 0 | - | |")
                continue
            recall = counts[i, i] / support[i]
            flag = "LOW-RECALL" if recall < recall_threshold else ""
            lines.append(f"| {label} | {support[i]} | {recall:.4f} | {flag} |")
        lines.append("")
    return "\n".join(lines) + "\n"


def confusion_to_csv(matrix: np.ndarray, schema: LabelSchema, path: str | Path) -> None:
    """Counts as CSV: header = predicted labels, first column = gold label."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["gold\\predicted", *schema.labels])
        for i, label in enumerate(schema.labels):
            writer.writerow([label, *matrix[i].tolist()])


def confusion_heatmap(matrix: np.ndarray, schema: LabelSchema, path: str | Path) -> None:
    """Render the counts as a heatmap image."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(1.2 * schema.num_classes + 2, schema.num_classes + 1.5))
    image = ax.imshow(matrix, cmap="Blues")
    ax.set_xticks(range(schema.num_classes), schema.labels, rotation=45, ha="right")
    ax.set_yticks(range(schema.num_classes), schema.labels)
    ax.set_xlabel("predicted")
    ax.set_ylabel("gold")
    ax.set_title(f"Confusion matrix: {schema.task_id}")
    threshold = matrix.max() / 2 if matrix.max() else 0.5
    for i in range(schema.num_classes):
        for j in range(schema.num_classes):
            color = "white" if matrix[i, j] > threshold else "black"
            ax.text(j, i, str(int(matrix[i, j])), ha="center", va="center", color=color)
    fig.colorbar(image, ax=ax, shrink=0.8)
    fig.tight_layout()
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=110)
    plt.close(fig)
