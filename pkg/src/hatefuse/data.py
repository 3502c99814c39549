"""Dataset loading, validation, preprocessing, and summaries.

Two on-disk formats are supported:

* TSV: UTF-8, tab separated, header row required. Columns: ``id``, ``text``,
  plus zero or more task columns (canonical task names or the shared-task
  aliases ``hate_type``/``hate_severity``/``to_whom``). Fields are split on
  raw tabs; no quoting. An empty label cell means the sample carries no gold
  label for that task.
* JSONL: one object per line with keys ``id``, ``text`` and an optional
  ``labels`` object mapping task name to label string.

Preprocessing is intentionally minimal: only Bangla digit code points
(U+09E6..U+09EF) are removed, everything else is preserved verbatim.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ValidationError
from .hashing import fingerprint
from .schema import TASK_ALIASES, LabelSchema, schema_fingerprint

SPLIT_NAMES = ("train", "dev", "test")

# U+09E6 .. U+09EF, removed by preprocess().
BANGLA_DIGITS = "".join(chr(cp) for cp in range(0x09E6, 0x09F0))
_DIGIT_TABLE = {cp: None for cp in range(0x09E6, 0x09F0)}


def preprocess(text: str) -> str:
    """Strip Bangla digits; every other character is kept untouched.

    Total and idempotent: preprocess(preprocess(x)) == preprocess(x).
    """
    return text.translate(_DIGIT_TABLE)


@dataclass(frozen=True)
class Sample:
    """One text instance with optional gold labels per task."""

    id: str
    text: str
    gold: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if not self.id:
            raise ValidationError("sample id must be non-empty")


@dataclass(frozen=True)
class DatasetSplit:
    """Ordered, immutable collection of samples for one canonical split."""

    name: str
    samples: tuple[Sample, ...]

    def __post_init__(self):
        if self.name not in SPLIT_NAMES:
            raise ValidationError(
                f"split name must be one of {SPLIT_NAMES}, got '{self.name}'"
            )
        object.__setattr__(self, "samples", tuple(self.samples))
        seen: set[str] = set()
        for sample in self.samples:
            if sample.id in seen:
                raise ValidationError(
                    f"duplicate sample id '{sample.id}' in split '{self.name}'"
                )
            seen.add(sample.id)

    def __len__(self) -> int:
        return len(self.samples)

    def texts(self) -> list[str]:
        return [s.text for s in self.samples]

    def ids(self) -> list[str]:
        return [s.id for s in self.samples]


def validate_labels(split: DatasetSplit, schemas: dict[str, LabelSchema]) -> None:
    """Check that every gold label belongs to its task's schema."""
    for sample in split.samples:
        for task, label in sample.gold.items():
            if task not in schemas:
                raise ValidationError(
                    f"sample '{sample.id}' carries a label for unknown task '{task}'"
                )
            schemas[task].index_of(label)


def _parse_tsv(path: Path, schemas: dict[str, LabelSchema]) -> list[Sample]:
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise ValidationError(f"{path}: file is empty (header row required)")

    header = lines[0].split("\t")
    try:
        id_col = header.index("id")
        text_col = header.index("text")
    except ValueError:
        raise ValidationError(
            f"{path}:1: header must contain 'id' and 'text' columns, got {header}"
        ) from None
    task_cols: dict[int, str] = {}
    for idx, name in enumerate(header):
        if name in TASK_ALIASES:
            task = TASK_ALIASES[name]
            if task in schemas:
                task_cols[idx] = task

    samples = []
    for lineno, line in enumerate(lines[1:], start=2):
        fields = line.split("\t")
        if len(fields) != len(header):
            raise ValidationError(
                f"{path}:{lineno}: expected {len(header)} tab-separated fields, "
                f"got {len(fields)}"
            )
        try:
            gold: dict[str, str] = {}
            for idx, task in task_cols.items():
                value = fields[idx]
                if value == "":
                    continue
                schemas[task].index_of(value)  # raises naming label and task
                gold[task] = value
            samples.append(Sample(id=fields[id_col], text=fields[text_col], gold=gold))
        except ValidationError as exc:
            raise ValidationError(f"{path}:{lineno}: {exc}") from None
    return samples


def _parse_jsonl(path: Path, schemas: dict[str, LabelSchema]) -> list[Sample]:
    samples = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"{path}:{lineno}: invalid JSON: {exc}") from None
            if not isinstance(record, dict) or "id" not in record or "text" not in record:
                raise ValidationError(
                    f"{path}:{lineno}: record must be an object with 'id' and 'text'"
                )
            try:
                gold: dict[str, str] = {}
                for task, label in (record.get("labels") or {}).items():
                    if task not in TASK_ALIASES:
                        raise ValidationError(f"unknown task '{task}' in labels")
                    canonical = TASK_ALIASES[task]
                    if canonical not in schemas or label is None:
                        continue
                    schemas[canonical].index_of(str(label))
                    gold[canonical] = str(label)
                samples.append(
                    Sample(id=str(record["id"]), text=str(record["text"]), gold=gold)
                )
            except ValidationError as exc:
                raise ValidationError(f"{path}:{lineno}: {exc}") from None
    return samples


def load_split(
    path: str | Path,
    schemas: dict[str, LabelSchema],
    format: str = "tsv",
    name: str | None = None,
) -> DatasetSplit:
    """Load and validate one split, preserving input order.

    Labels are checked against the schema as they are read, so a bad label
    fails with the offending file line. ``name`` defaults to the canonical
    split name inferred from the file stem, falling back to "train".
    """
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"split file not found: {path}")
    if format == "tsv":
        samples = _parse_tsv(path, schemas)
    elif format == "jsonl":
        samples = _parse_jsonl(path, schemas)
    else:
        raise ValidationError(f"unknown format '{format}' (expected tsv or jsonl)")

    if name is None:
        stem = path.stem.lower()
        name = next((n for n in SPLIT_NAMES if n in stem), "train")
    try:
        return DatasetSplit(name=name, samples=tuple(samples))
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from None


def save_split(split: DatasetSplit, path: str | Path, format: str = "tsv") -> None:
    """Write a split back to disk; load_split() round-trips it exactly."""
    path = Path(path)
    if format == "tsv":
        tasks = sorted({t for s in split.samples for t in s.gold})
        lines = ["\t".join(["id", "text", *tasks])]
        for sample in split.samples:
            for piece in (sample.id, sample.text):
                if "\t" in piece or "\n" in piece:
                    raise ValidationError(
                        f"sample '{sample.id}' contains a tab or newline; "
                        "use jsonl for such text"
                    )
            row = [sample.id, sample.text] + [sample.gold.get(t, "") for t in tasks]
            lines.append("\t".join(row))
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    elif format == "jsonl":
        with open(path, "w", encoding="utf-8") as fh:
            for sample in split.samples:
                record = {"id": sample.id, "text": sample.text, "labels": sample.gold}
                fh.write(json.dumps(record, ensure_ascii=False, sort_keys=True) + "\n")
    else:
        raise ValidationError(f"unknown format '{format}' (expected tsv or jsonl)")


def preprocess_split(split: DatasetSplit) -> DatasetSplit:
    """Apply preprocess() to every sample text."""
    return DatasetSplit(
        name=split.name,
        samples=tuple(
            Sample(id=s.id, text=preprocess(s.text), gold=s.gold) for s in split.samples
        ),
    )


def label_distribution(split: DatasetSplit, task: str) -> dict[str, int]:
    """Count gold labels for one task. Counts sum to the labeled-sample total."""
    counts: dict[str, int] = {}
    for sample in split.samples:
        label = sample.gold.get(task)
        if label is not None:
            counts[label] = counts.get(label, 0) + 1
    if not counts:
        raise ValidationError(
            f"no sample in split '{split.name}' carries a gold label for task '{task}'"
        )
    return counts


def gold_indices(
    split: DatasetSplit, schemas: dict[str, LabelSchema], tasks: list[str]
) -> dict[str, list[int]]:
    """Dense class-index arrays per task; every sample must be labeled."""
    out: dict[str, list[int]] = {}
    for task in tasks:
        schema = schemas[task]
        indices = []
        for sample in split.samples:
            label = sample.gold.get(task)
            if label is None:
                raise ValidationError(
                    f"sample '{sample.id}' in split '{split.name}' has no gold "
                    f"label for task '{task}'"
                )
            indices.append(schema.index_of(label))
        out[task] = indices
    return out


def split_fingerprint(split: DatasetSplit, schemas: dict[str, LabelSchema]) -> str:
    """Data-lineage fingerprint: schema set plus full split content.

    Prediction matrices and metrics documents embed this value; fuse and
    evaluate refuse to mix artifacts whose fingerprints differ.
    """
    payload = {
        "schemas": schema_fingerprint(schemas),
        "split": split.name,
        "samples": [
            [s.id, s.text, sorted(s.gold.items())] for s in split.samples
        ],
    }
    return fingerprint(payload)
