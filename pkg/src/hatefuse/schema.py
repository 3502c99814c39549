"""Label schemas for the three classification tasks.

The shared-task data carries three per-sample annotations: the hate *type*
(6 classes), its *severity* (3 classes), and the *target* group (5 classes,
including None). Label order is fixed here and every artifact that names a
task refers back to these orderings.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ValidationError
from .hashing import fingerprint

TASK_TYPE = "type"
TASK_SEVERITY = "severity"
TASK_TARGET = "target"

CANONICAL_TASKS = (TASK_TYPE, TASK_SEVERITY, TASK_TARGET)

# Column headers the shared-task files use for the same three tasks.
TASK_ALIASES = {
    "type": TASK_TYPE,
    "hate_type": TASK_TYPE,
    "severity": TASK_SEVERITY,
    "hate_severity": TASK_SEVERITY,
    "target": TASK_TARGET,
    "to_whom": TASK_TARGET,
}


@dataclass(frozen=True)
class LabelSchema:
    """Ordered label list for one task. Order is part of the contract."""

    task_id: str
    labels: tuple[str, ...]

    def __post_init__(self):
        if not self.task_id:
            raise ValidationError("schema task_id must be non-empty")
        object.__setattr__(self, "labels", tuple(self.labels))
        if len(self.labels) < 2:
            raise ValidationError(
                f"schema for task '{self.task_id}' needs at least 2 labels"
            )
        if len(set(self.labels)) != len(self.labels):
            raise ValidationError(
                f"schema for task '{self.task_id}' has duplicate labels"
            )

    @property
    def num_classes(self) -> int:
        return len(self.labels)

    def index_of(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise ValidationError(
                f"unknown label '{label}' for task '{self.task_id}' "
                f"(expected one of: {', '.join(self.labels)})"
            ) from None

    def to_dict(self) -> dict:
        return {"task_id": self.task_id, "labels": list(self.labels)}


TYPE_SCHEMA = LabelSchema(
    TASK_TYPE,
    ("None", "Abusive", "Political Hate", "Profane", "Religious Hate", "Sexism"),
)
SEVERITY_SCHEMA = LabelSchema(TASK_SEVERITY, ("Little to None", "Mild", "Severe"))
TARGET_SCHEMA = LabelSchema(
    TASK_TARGET, ("None", "Individual", "Organization", "Community", "Society")
)

DEFAULT_SCHEMAS: dict[str, LabelSchema] = {
    TASK_TYPE: TYPE_SCHEMA,
    TASK_SEVERITY: SEVERITY_SCHEMA,
    TASK_TARGET: TARGET_SCHEMA,
}


def resolve_task(name: str) -> str:
    """Map a task name or known column alias to a canonical task id."""
    try:
        return TASK_ALIASES[name]
    except KeyError:
        raise ValidationError(
            f"unknown task '{name}' (expected one of: {', '.join(sorted(set(TASK_ALIASES)))})"
        ) from None


def schemas_for(tasks: list[str] | tuple[str, ...]) -> dict[str, LabelSchema]:
    return {resolve_task(t): DEFAULT_SCHEMAS[resolve_task(t)] for t in tasks}


def schema_fingerprint(schemas: dict[str, LabelSchema]) -> str:
    """Stable fingerprint of a schema set, independent of dict ordering."""
    payload = sorted((s.task_id, list(s.labels)) for s in schemas.values())
    return fingerprint(payload)
