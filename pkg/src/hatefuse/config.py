"""Run configuration: one flat YAML file drives the whole pipeline.

Precedence: built-in defaults < config file < named preset < CLI flags.
Relative data paths resolve against ``HATEFUSE_DATA_ROOT`` when set,
otherwise against the config file's directory.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, fields
from pathlib import Path

import yaml

from .encoders import EncoderConfig
from .errors import ConfigurationError, ValidationError
from .model import HeadConfig, LossWeights, TrainingConfig
from .schema import CANONICAL_TASKS, LabelSchema, resolve_task, schemas_for

DATA_ROOT_ENV = "HATEFUSE_DATA_ROOT"

# Named option bundles; "standard-finetune" is the training recipe shared by
# every backbone, "weighted-1c" the ranked three-member fusion weights.
PRESETS: dict[str, dict] = {
    "standard-finetune": {
        "learning_rate": 2e-5,
        "batch_size": 16,
        "epochs": 3,
        "weight_decay": 0.01,
        "max_length": 128,
    },
    "weighted-1c": {
        "fuse_method": "weighted",
        "fuse_weights": [0.5, 0.3, 0.2],
    },
}


@dataclass
class RunConfig:
    # data
    train_path: str | None = None
    dev_path: str | None = None
    test_path: str | None = None
    format: str = "tsv"
    tasks: list[str] = field(default_factory=lambda: list(CANONICAL_TASKS))
    # mode
    mode: str = "multitask"
    task: str | None = None
    # encoder
    encoder_family: str = "toy"
    backbone_id: str | None = None
    max_length: int = 128
    hidden_dim: int | None = 64
    recurrent_cell: str | None = None
    embedding_source: str | None = None
    embedding_dim: int = 300
    hash_seed: int = 0
    # loss weights (multitask)
    alpha: float = 1.0
    beta: float = 1.0
    gamma: float = 1.0
    # training
    learning_rate: float = 2e-5
    batch_size: int = 16
    epochs: int = 3
    weight_decay: float = 0.01
    seed: int = 0
    # ensemble
    fuse_method: str = "soft"
    fuse_weights: list[float] | None = None
    tie_break: str = "soft_fallback"
    # metrics
    task_weights: dict[str, float] | None = None
    recall_threshold: float = 0.5
    errors_top_k: int = 5
    # output
    out_dir: str = "runs/out"
    model_name: str | None = None
    # resolution base for relative paths (set on load)
    base_dir: str = "."

    def validate(self) -> None:
        if self.format not in ("tsv", "jsonl"):
            raise ValidationError(f"format must be tsv or jsonl, got '{self.format}'")
        if self.mode not in ("single", "multitask"):
            raise ValidationError(f"mode must be single or multitask, got '{self.mode}'")
        if self.mode == "single":
            if not self.task:
                raise ValidationError("mode 'single' requires the 'task' field")
            resolve_task(self.task)
        else:
            missing = set(CANONICAL_TASKS) - {resolve_task(t) for t in self.tasks}
            if missing:
                raise ValidationError(
                    f"multitask mode needs all three tasks; missing {sorted(missing)}"
                )
        self.encoder()  # family/field consistency
        self.training()

    def schemas(self) -> dict[str, LabelSchema]:
        return schemas_for(self.tasks)

    def encoder(self) -> EncoderConfig:
        return EncoderConfig(
            family=self.encoder_family,
            backbone_id=self.backbone_id,
            max_length=self.max_length,
            hidden_dim=self.hidden_dim,
            recurrent_cell=self.recurrent_cell,
            embedding_source=self.embedding_source,
            embedding_dim=self.embedding_dim,
            hash_seed=self.hash_seed,
        )

    def training(self) -> TrainingConfig:
        return TrainingConfig(
            learning_rate=self.learning_rate,
            batch_size=self.batch_size,
            epochs=self.epochs,
            weight_decay=self.weight_decay,
            seed=self.seed,
        )

    def loss_weights(self) -> LossWeights | None:
        if self.mode == "single":
            return None
        return LossWeights(alpha=self.alpha, beta=self.beta, gamma=self.gamma)

    def head_configs(self) -> list[HeadConfig]:
        schemas = self.schemas()
        if self.mode == "single":
            task = resolve_task(self.task)
            return [HeadConfig(task, schemas[task].num_classes)]
        return [HeadConfig(t, schemas[t].num_classes) for t in CANONICAL_TASKS]

    def metric_task_weights(self) -> dict[str, float] | None:
        if self.task_weights is None:
            return None
        return {resolve_task(t): float(w) for t, w in self.task_weights.items()}

    def split_path(self, split_name: str) -> Path:
        raw = {
            "train": self.train_path,
            "dev": self.dev_path,
            "test": self.test_path,
        }.get(split_name)
        if raw is None:
            raise ValidationError(f"no {split_name}_path configured")
        path = Path(raw)
        if path.is_absolute():
            return path
        root = os.environ.get(DATA_ROOT_ENV)
        return (Path(root) if root else Path(self.base_dir)) / path

    def configured_splits(self) -> list[str]:
        return [
            name
            for name, value in (
                ("train", self.train_path),
                ("dev", self.dev_path),
                ("test", self.test_path),
            )
            if value is not None
        ]


_FIELD_NAMES = {f.name for f in fields(RunConfig)}


def apply_preset(values: dict, preset: str) -> dict:
    if preset not in PRESETS:
        raise ConfigurationError(
            f"unknown preset '{preset}' (available: {', '.join(sorted(PRESETS))})"
        )
    merged = dict(values)
    merged.update(PRESETS[preset])
    return merged


def load_run_config(
    path: str | Path, preset: str | None = None, **overrides
) -> RunConfig:
    """Parse, overlay preset and CLI overrides, validate."""
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"config file not found: {path}")
    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
    except yaml.YAMLError as exc:
        raise ValidationError(f"{path}: invalid YAML: {exc}") from None
    if not isinstance(raw, dict):
        raise ValidationError(f"{path}: config must be a mapping")
    unknown = set(raw) - _FIELD_NAMES
    if unknown:
        raise ValidationError(f"{path}: unknown config keys: {sorted(unknown)}")
    if preset:
        raw = apply_preset(raw, preset)
    for key, value in overrides.items():
        if value is not None:
            raw[key] = value
    raw.setdefault("base_dir", str(path.parent))
    config = RunConfig(**raw)
    config.validate()
    return config
