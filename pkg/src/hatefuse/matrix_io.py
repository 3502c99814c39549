"""Prediction-matrix interchange files.

One JSON document per (model, task): header fields first, then the
probability rows one-per-line. Writing is byte-deterministic for identical
inputs; the same schema is produced by prediction and consumed by fusion
and evaluation.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .ensemble import PredictionMatrix
from .errors import ValidationError

FORMAT_TAG = "hatefuse/prediction-matrix@1"


def _dump(value) -> str:
    return json.dumps(value, ensure_ascii=False, sort_keys=True)


def write_matrix(matrix: PredictionMatrix, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = ["{"]
    lines.append(f'"format": {_dump(FORMAT_TAG)},')
    lines.append(f'"model_id": {_dump(matrix.model_id)},')
    lines.append(f'"task_id": {_dump(matrix.task_id)},')
    lines.append(f'"labels": {_dump(list(matrix.labels))},')
    lines.append(f'"sample_ids": {_dump(list(matrix.sample_ids))},')
    lines.append(f'"fingerprint": {_dump(matrix.fingerprint)},')
    lines.append(f'"meta": {_dump(matrix.meta)},')
    rows = ",\n".join(_dump([float(x) for x in row]) for row in matrix.probs)
    lines.append('"probs": [')
    if rows:
        lines.append(rows)
    lines.append("]")
    lines.append("}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_matrix(path: str | Path) -> PredictionMatrix:
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"prediction matrix file not found: {path}")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON: {exc}") from None
    if not isinstance(doc, dict) or doc.get("format") != FORMAT_TAG:
        raise ValidationError(
            f"{path}: not a prediction-matrix file (expected format tag "
            f"'{FORMAT_TAG}')"
        )
    missing = {"model_id", "task_id", "labels", "sample_ids", "probs"} - set(doc)
    if missing:
        raise ValidationError(f"{path}: missing fields: {sorted(missing)}")
    try:
        return PredictionMatrix(
            model_id=doc["model_id"],
            task_id=doc["task_id"],
            labels=tuple(doc["labels"]),
            sample_ids=tuple(doc["sample_ids"]),
            probs=np.array(doc["probs"], dtype=np.float64).reshape(
                len(doc["sample_ids"]), len(doc["labels"])
            ),
            fingerprint=doc.get("fingerprint", ""),
            meta=doc.get("meta", {}),
        )
    except (ValidationError, ValueError) as exc:
        raise ValidationError(f"{path}: {exc}") from None
