"""Training orchestration: batching, epochs, loss log, run manifest.

Single-task mode takes one head and no loss weights; multitask mode takes
the three canonical heads plus LossWeights. Batch order is seeded per epoch
independently of the head set, and heads initialize to zero, so zeroing
beta and gamma reproduces the single-task type trajectory exactly.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from ..data import DatasetSplit, gold_indices, preprocess_split
from ..encoders import EncoderConfig
from ..errors import ConfigurationError, TrainingDivergedError, ValidationError
from ..hashing import stable_seed
from ..schema import CANONICAL_TASKS, DEFAULT_SCHEMAS, LabelSchema
from .heads import HeadConfig
from .losses import LossWeights
from .store import TrainedModel


@dataclass(frozen=True)
class TrainingConfig:
    learning_rate: float = 2e-5
    batch_size: int = 16
    epochs: int = 3
    optimizer: str = "adamw"
    weight_decay: float = 0.01
    seed: int = 0

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ConfigurationError("learning_rate must be > 0")
        if self.batch_size < 1:
            raise ConfigurationError("batch_size must be >= 1")
        if self.epochs < 1:
            raise ConfigurationError("epochs must be >= 1")
        if self.optimizer != "adamw":
            raise ConfigurationError(
                f"unsupported optimizer '{self.optimizer}' (decoupled-weight-decay "
                "adam is the only implemented semantics)"
            )

    def to_dict(self) -> dict:
        return {
            "learning_rate": self.learning_rate,
            "batch_size": self.batch_size,
            "epochs": self.epochs,
            "optimizer": self.optimizer,
            "weight_decay": self.weight_decay,
            "seed": self.seed,
        }


@dataclass
class TrainResult:
    model: TrainedModel
    step_losses: list[float]
    epoch_mean_losses: list[float]
    wall_clock_seconds: float
    steps_per_epoch: int


def _validate_heads(
    head_configs: Sequence[HeadConfig],
    loss_weights: LossWeights | None,
    schemas: dict[str, LabelSchema],
):
    tasks = [hc.task_id for hc in head_configs]
    if len(head_configs) == 1:
        if loss_weights is not None:
            raise ConfigurationError("single-task training takes no loss weights")
    elif len(head_configs) == 3:
        if sorted(tasks) != sorted(CANONICAL_TASKS):
            raise ConfigurationError(
                f"multitask training requires heads for {CANONICAL_TASKS}, got {tasks}"
            )
        if loss_weights is None:
            raise ConfigurationError("multitask training requires loss weights")
    else:
        raise ConfigurationError(
            f"training takes one head or three heads, got {len(head_configs)}"
        )
    for hc in head_configs:
        if hc.task_id not in schemas:
            raise ConfigurationError(f"no schema provided for task '{hc.task_id}'")
        if hc.num_classes != schemas[hc.task_id].num_classes:
            raise ConfigurationError(
                f"head for task '{hc.task_id}' has {hc.num_classes} classes but "
                f"the schema has {schemas[hc.task_id].num_classes}"
            )


def _build_backend(encoder_config, head_configs, seed, corpus):
    if encoder_config.family == "transformer":
        from .torch_backend import TorchBackend

        return TorchBackend.create(encoder_config, head_configs, seed, corpus)
    from .network import NumpyBackend

    return NumpyBackend.create(encoder_config, head_configs, seed, corpus)


def train(
    split: DatasetSplit,
    encoder_config: EncoderConfig,
    head_configs: Sequence[HeadConfig],
    training_config: TrainingConfig,
    loss_weights: LossWeights | None = None,
    schemas: dict[str, LabelSchema] | None = None,
    model_id: str | None = None,
) -> TrainResult:
    """Fit the model and return it with the full per-step loss log.

    The loss log has epochs * ceil(N / batch_size) finite entries; a
    non-finite loss aborts immediately naming the offending batch.
    """
    if len(split) == 0:
        raise ValidationError("cannot train on an empty split")
    schemas = dict(schemas) if schemas is not None else dict(DEFAULT_SCHEMAS)
    _validate_heads(head_configs, loss_weights, schemas)
    tasks = [hc.task_id for hc in head_configs]

    processed = preprocess_split(split)
    texts = processed.texts()
    gold = {
        task: np.asarray(idx, dtype=np.int64)
        for task, idx in gold_indices(processed, schemas, tasks).items()
    }
    if loss_weights is not None:
        task_weights = loss_weights.as_map()
    else:
        task_weights = {tasks[0]: 1.0}

    start = time.perf_counter()
    backend = _build_backend(encoder_config, head_configs, training_config.seed, texts)
    backend.setup_optimizer(training_config.learning_rate, training_config.weight_decay)
    backend.cache_features(texts)

    n = len(texts)
    batch_size = training_config.batch_size
    steps_per_epoch = math.ceil(n / batch_size)
    step_losses: list[float] = []
    epoch_means: list[float] = []
    for epoch in range(training_config.epochs):
        order_rng = np.random.default_rng(
            np.random.SeedSequence(stable_seed(training_config.seed, "order", epoch))
        )
        perm = order_rng.permutation(n)
        epoch_losses = []
        for step in range(steps_per_epoch):
            rows = perm[step * batch_size : (step + 1) * batch_size]
            batch_texts = [texts[i] for i in rows]
            batch_gold = {task: gold[task][rows] for task in tasks}
            loss = backend.train_step(
                batch_texts, batch_gold, task_weights, row_slice=rows
            )
            if not math.isfinite(loss):
                raise TrainingDivergedError(
                    f"non-finite loss at epoch {epoch + 1}, batch index {step} "
                    f"(first sample id '{split.samples[rows[0]].id}')"
                )
            step_losses.append(loss)
            epoch_losses.append(loss)
        epoch_means.append(float(np.mean(epoch_losses)))

    wall = time.perf_counter() - start
    model = TrainedModel(
        backend,
        encoder_config,
        head_configs,
        {t: schemas[t] for t in tasks},
        training_meta=training_config.to_dict(),
        loss_weights=loss_weights,
        model_id=model_id,
    )
    return TrainResult(
        model=model,
        step_losses=step_losses,
        epoch_mean_losses=epoch_means,
        wall_clock_seconds=wall,
        steps_per_epoch=steps_per_epoch,
    )


def write_manifest(path: str | Path, result: TrainResult, extra: dict | None = None) -> None:
    """Plain-text key-value manifest plus a per-epoch loss table."""
    model = result.model
    lines = ["# hatefuse training run manifest"]
    info: dict[str, object] = {
        "model_id": model.model_id,
        "fingerprint": model.fingerprint,
        "backend": model.backend.kind,
        "mode": "multitask" if len(model.head_configs) == 3 else "single",
        "tasks": ",".join(model.tasks),
        "encoder_family": model.encoder_config.family,
    }
    info.update(model.training_meta)
    if model.loss_weights is not None:
        info.update(model.loss_weights.to_dict())
    if extra:
        info.update(extra)
    info["n_steps"] = len(result.step_losses)
    info["wall_clock_seconds"] = f"{result.wall_clock_seconds:.3f}"
    for key, value in info.items():
        lines.append(f"{key} = {value}")
    lines.append("")
    lines.append("epoch\tmean_loss\tsteps")
    for epoch, mean in enumerate(result.epoch_mean_losses, start=1):
        lines.append(f"{epoch}\t{mean:.10g}\t{result.steps_per_epoch}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
