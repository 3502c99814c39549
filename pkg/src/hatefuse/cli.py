"""Command-line pipeline: prepare -> train -> predict -> fuse -> evaluate.

Files are the only medium between stages. Exit codes: 0 success,
1 validation/configuration error, 2 runtime failure.
"""

from __future__ import annotations

import functools
import sys
from pathlib import Path

import click

from . import __version__
from .config import PRESETS, RunConfig, load_run_config
from .data import label_distribution, load_split, split_fingerprint
from .ensemble import argmax_labels, hard_vote, soft_vote, weighted_vote
from .errors import (
    ConfigurationError,
    FingerprintError,
    HatefuseError,
    ValidationError,
)
from .evaluation import (
    compute_report,
    confusion_heatmap,
    confusion_to_csv,
    error_report,
)
from .matrix_io import read_matrix, write_matrix
from .model import TrainedModel, train, write_manifest
from .schema import schemas_for


def _exit_codes(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            fn(*args, **kwargs)
        except (ValidationError, ConfigurationError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(1)
        except HatefuseError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(2)
        except Exception as exc:  # runtime failure contract
            click.echo(f"unexpected error: {type(exc).__name__}: {exc}", err=True)
            sys.exit(2)

    return wrapper


def _out_dir(config: RunConfig, out: str | None) -> Path:
    path = Path(out) if out else Path(config.base_dir) / config.out_dir
    path.mkdir(parents=True, exist_ok=True)
    return path


def _load_configured_split(config: RunConfig, split_name: str):
    split = load_split(
        config.split_path(split_name),
        config.schemas(),
        format=config.format,
        name=split_name,
    )
    if len(split) == 0:
        raise ValidationError(
            f"{split_name} split at {config.split_path(split_name)} is empty"
        )
    return split


config_option = click.option(
    "--config", "config_path", required=True, type=click.Path(), help="Run config YAML."
)
preset_option = click.option(
    "--preset", default=None, help=f"Apply a named preset: {', '.join(sorted(PRESETS))}."
)
out_option = click.option("--out", default=None, help="Output directory override.")


@click.group()
@click.version_option(version=__version__, prog_name="hatefuse")
def main():
    """Multitask text classification with voting-ensemble fusion."""


@main.command()
@config_option
@preset_option
@out_option
@click.option("--format", "fmt", default=None, type=click.Choice(["tsv", "jsonl"]))
@_exit_codes
def prepare(config_path, preset, out, fmt):
    """Validate configured splits and write label-distribution tables."""
    config = load_run_config(config_path, preset=preset, format=fmt)
    out_dir = _out_dir(config, out)
    schemas = config.schemas()
    if not config.configured_splits():
        raise ValidationError("config names no data paths (train_path/dev_path/test_path)")
    for split_name in config.configured_splits():
        split = _load_configured_split(config, split_name)
        lines = [f"# label distribution: split={split_name} (N={len(split)})"]
        for task, schema in schemas.items():
            try:
                counts = label_distribution(split, task)
            except ValidationError:
                lines.append(f"\ntask: {task} (no gold labels)")
                continue
            lines.append(f"\ntask: {task}")
            for label in schema.labels:
                lines.append(f"  {label:<20} {counts.get(label, 0):>8}")
            lines.append(f"  {'total':<20} {sum(counts.values()):>8}")
        table = "\n".join(lines) + "\n"
        table_path = out_dir / f"distribution_{split_name}.txt"
        table_path.write_text(table, encoding="utf-8")
        click.echo(table)
        click.echo(f"wrote {table_path}")


@main.command(name="train")
@config_option
@preset_option
@out_option
@click.option("--seed", default=None, type=int, help="Override the config seed.")
@_exit_codes
def train_cmd(config_path, preset, out, seed):
    """Train a single-task or multitask model from the train split."""
    config = load_run_config(config_path, preset=preset, seed=seed)
    out_dir = _out_dir(config, out)
    split = _load_configured_split(config, "train")
    result = train(
        split,
        config.encoder(),
        config.head_configs(),
        config.training(),
        loss_weights=config.loss_weights(),
        schemas=config.schemas(),
        model_id=config.model_name,
    )
    model_path = out_dir / "model.npz"
    result.model.save(model_path)
    write_manifest(out_dir / "manifest.txt", result)
    for epoch, mean in enumerate(result.epoch_mean_losses, start=1):
        click.echo(f"epoch {epoch}: mean loss {mean:.6f}")
    click.echo(f"wrote {model_path} and {out_dir / 'manifest.txt'}")


@main.command()
@config_option
@out_option
@click.option("--model", "model_path", required=True, type=click.Path())
@click.option(
    "--split", "split_name", default="dev", type=click.Choice(["train", "dev", "test"])
)
@_exit_codes
def predict(config_path, out, model_path, split_name):
    """Write one prediction-matrix file per task head of a trained model."""
    config = load_run_config(config_path)
    out_dir = _out_dir(config, out)
    model = TrainedModel.load(model_path)
    split = _load_configured_split(config, split_name)
    matrices = model.predict_proba(split, schemas=config.schemas())
    for task, matrix in matrices.items():
        path = out_dir / f"pred_{task}.json"
        write_matrix(matrix, path)
        click.echo(f"wrote {path} ({matrix.n_samples} x {len(matrix.labels)})")


@main.command()
@config_option
@preset_option
@out_option
@click.argument("matrix_files", nargs=-1, required=True, type=click.Path())
@_exit_codes
def fuse(config_path, preset, out, matrix_files):
    """Fuse aligned prediction matrices into one file.

    Hard voting emits its label decisions as a one-hot matrix so every
    fusion method shares the same interchange format.
    """
    config = load_run_config(config_path, preset=preset)
    out_dir = _out_dir(config, out)
    matrices = [read_matrix(p) for p in matrix_files]
    method = config.fuse_method
    if method == "soft":
        fused = soft_vote(matrices)
    elif method == "weighted":
        if config.fuse_weights is None:
            raise ValidationError(
                "fuse_method 'weighted' requires fuse_weights in the config "
                "(or --preset weighted-1c)"
            )
        fused = weighted_vote(matrices, config.fuse_weights)
    elif method == "hard":
        labels = hard_vote(matrices, tie_break=config.tie_break)
        first = matrices[0]
        import numpy as np

        onehot = np.zeros((first.n_samples, len(first.labels)))
        for row, label in enumerate(labels):
            onehot[row, first.labels.index(label)] = 1.0
        from .ensemble import PredictionMatrix

        fused = PredictionMatrix(
            model_id=f"hard({'+'.join(m.model_id for m in matrices)})",
            task_id=first.task_id,
            labels=first.labels,
            sample_ids=first.sample_ids,
            probs=onehot,
            fingerprint=first.fingerprint,
            meta={
                "method": "hard",
                "tie_break": config.tie_break,
                "members": [m.model_id for m in matrices],
            },
        )
    else:
        raise ValidationError(f"unknown fuse method '{method}'")
    path = out_dir / f"fused_{fused.task_id}.json"
    write_matrix(fused, path)
    click.echo(f"wrote {path} (method={method})")


@main.command()
@config_option
@out_option
@click.option(
    "--split", "split_name", default="dev", type=click.Choice(["train", "dev", "test"])
)
@click.argument("prediction_files", nargs=-1, required=True, type=click.Path())
@_exit_codes
def evaluate(config_path, out, split_name, prediction_files):
    """Score prediction matrices against a gold split; write all reports."""
    config = load_run_config(config_path)
    out_dir = _out_dir(config, out)
    schemas = config.schemas()
    split = _load_configured_split(config, split_name)
    lineage = split_fingerprint(split, schemas)

    predictions = {}
    for path in prediction_files:
        matrix = read_matrix(path)
        if matrix.task_id in predictions:
            raise ValidationError(
                f"two prediction files supplied for task '{matrix.task_id}'"
            )
        if matrix.fingerprint and matrix.fingerprint != lineage:
            raise FingerprintError(
                f"{path}: prediction fingerprint does not match the "
                f"{split_name} split/schema lineage"
            )
        if list(matrix.sample_ids) != split.ids():
            raise ValidationError(
                f"{path}: sample ids do not match the {split_name} split order"
            )
        predictions[matrix.task_id] = argmax_labels(matrix)

    report = compute_report(
        split,
        predictions,
        schemas,
        task_weights=config.metric_task_weights(),
        fingerprint=lineage,
    )
    (out_dir / "metrics.json").write_text(report.to_json_doc(), encoding="utf-8")
    for task, matrix in report.confusion.items():
        confusion_to_csv(matrix, schemas[task], out_dir / f"confusion_{task}.csv")
        confusion_heatmap(matrix, schemas[task], out_dir / f"confusion_{task}.png")
    report_doc = error_report(
        split,
        predictions,
        k=config.errors_top_k,
        schemas=schemas,
        recall_threshold=config.recall_threshold,
    )
    (out_dir / "report.md").write_text(report_doc, encoding="utf-8")

    for task, score in report.per_task_micro_f1.items():
        click.echo(f"micro-F1[{task}] = {score:.4f}")
    if report.weighted_micro_f1 is not None:
        click.echo(
            f"weighted micro-F1 = {report.weighted_micro_f1:.4f} "
            f"(task weights: {report.task_weights})"
        )
    click.echo(f"wrote metrics and reports under {out_dir}")


@main.command()
@click.option("--repeats", default=3, type=int, show_default=True)
@_exit_codes
def bench(repeats):
    """Time the numba kernels against their pure-numpy fallbacks."""
    from .bench import benchmark_rows, format_table

    click.echo(format_table(benchmark_rows(repeats=repeats)))


if __name__ == "__main__":
    main()
