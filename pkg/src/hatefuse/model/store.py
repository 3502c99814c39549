"""Trained-model handle: prediction surface plus fingerprinted persistence.

A saved model is one ``.npz`` holding every weight array plus a JSON meta
entry (configs, schemas, fingerprint, weights checksum). Loading re-derives
the fingerprint and checksum and refuses mismatched config/weight blobs.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from ..data import DatasetSplit, preprocess_split, split_fingerprint
from ..encoders import EncoderConfig
from ..ensemble import PredictionMatrix
from ..errors import ConfigurationError, FingerprintError
from ..hashing import fingerprint, sha256_hex
from ..schema import LabelSchema, schema_fingerprint
from .heads import HeadConfig
from .losses import LossWeights

FORMAT_TAG = "hatefuse/model@1"


def _weights_checksum(arrays: Mapping[str, np.ndarray]) -> str:
    digest_parts = []
    for name in sorted(arrays):
        arr = np.ascontiguousarray(arrays[name])
        digest_parts.append(
            sha256_hex(name.encode() + str(arr.shape).encode() + arr.tobytes())
        )
    return sha256_hex("".join(digest_parts))


class TrainedModel:
    def __init__(
        self,
        backend,
        encoder_config: EncoderConfig,
        head_configs: Sequence[HeadConfig],
        schemas: dict[str, LabelSchema],
        training_meta: dict,
        loss_weights: LossWeights | None = None,
        model_id: str | None = None,
    ):
        self.backend = backend
        self.encoder_config = encoder_config
        self.head_configs = list(head_configs)
        self.schemas = schemas
        self.training_meta = training_meta
        self.loss_weights = loss_weights
        self.tasks = [hc.task_id for hc in self.head_configs]
        self.model_id = model_id or self._default_id()

    def _core_meta(self) -> dict:
        return {
            "format": FORMAT_TAG,
            "backend": self.backend.kind,
            "encoder": self.encoder_config.to_dict(),
            "heads": [hc.to_dict() for hc in self.head_configs],
            "schemas": sorted(
                (s.task_id, list(s.labels)) for s in self.schemas.values()
            ),
            "loss_weights": self.loss_weights.to_dict() if self.loss_weights else None,
            "training": self.training_meta,
        }

    @property
    def fingerprint(self) -> str:
        return fingerprint(self._core_meta())

    @property
    def schema_fp(self) -> str:
        return schema_fingerprint(self.schemas)

    def _default_id(self) -> str:
        if self.encoder_config.family == "transformer":
            base = self.encoder_config.backbone_id.rsplit("/", 1)[-1]
        elif self.encoder_config.family == "recurrent":
            base = f"{self.encoder_config.recurrent_cell}-{self.encoder_config.embedding_source}"
        else:
            base = "toy"
        mode = "mtl" if len(self.head_configs) == 3 else self.head_configs[0].task_id
        return f"{base}-{mode}@{self.fingerprint[:8]}"

    def predict_proba(
        self,
        split: DatasetSplit,
        schemas: dict[str, LabelSchema] | None = None,
        batch_size: int = 64,
    ) -> dict[str, PredictionMatrix]:
        """One aligned probability matrix per task head, in split order.

        If a schema set is supplied it must fingerprint-match the one the
        model was trained with.
        """
        if schemas is not None and schema_fingerprint(schemas) != self.schema_fp:
            raise FingerprintError(
                "schema fingerprint mismatch: the supplied schema set differs "
                "from the one this model was trained with"
            )
        lineage = split_fingerprint(split, self.schemas)
        processed = preprocess_split(split)
        probs = self.backend.predict_proba(processed.texts(), batch_size=batch_size)
        matrices = {}
        for task in self.tasks:
            matrices[task] = PredictionMatrix(
                model_id=self.model_id,
                task_id=task,
                labels=self.schemas[task].labels,
                sample_ids=tuple(split.ids()),
                probs=probs[task],
                fingerprint=lineage,
            )
        return matrices

    def save(self, path: str | Path) -> None:
        path = Path(path)
        arrays = {f"arr/{k}": np.asarray(v) for k, v in self.backend.state_arrays().items()}
        meta = self._core_meta()
        meta["fingerprint"] = self.fingerprint
        meta["model_id"] = self.model_id
        meta["backend_meta"] = self.backend.state_meta()
        meta["weights_checksum"] = _weights_checksum(arrays)
        payload = {"meta": np.array(json.dumps(meta, ensure_ascii=False))}
        payload.update(arrays)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "wb") as fh:
            np.savez(fh, **payload)

    @classmethod
    def load(cls, path: str | Path) -> "TrainedModel":
        path = Path(path)
        if not path.exists():
            raise ConfigurationError(f"model file not found: {path}")
        with np.load(path, allow_pickle=False) as blob:
            try:
                meta = json.loads(str(blob["meta"]))
            except (KeyError, json.JSONDecodeError) as exc:
                raise ConfigurationError(f"{path}: not a model file ({exc})") from None
            arrays = {k: np.array(blob[k]) for k in blob.files if k.startswith("arr/")}
        if meta.get("format") != FORMAT_TAG:
            raise ConfigurationError(f"{path}: unknown model format tag")
        if meta["weights_checksum"] != _weights_checksum(arrays):
            raise FingerprintError(
                f"{path}: weight blob does not match its recorded checksum"
            )

        encoder_config = EncoderConfig.from_dict(meta["encoder"])
        head_configs = [HeadConfig(**hc) for hc in meta["heads"]]
        schemas = {
            task: LabelSchema(task, tuple(labels)) for task, labels in meta["schemas"]
        }
        loss_weights = (
            LossWeights(**meta["loss_weights"]) if meta["loss_weights"] else None
        )
        stripped = {k[len("arr/") :]: v for k, v in arrays.items()}
        if meta["backend"] == "numpy":
            from .network import NumpyBackend

            backend = NumpyBackend.from_state(
                encoder_config, head_configs, meta["backend_meta"], stripped
            )
        elif meta["backend"] == "torch":
            from .torch_backend import TorchBackend

            backend = TorchBackend.from_state(
                encoder_config, head_configs, meta["backend_meta"], stripped
            )
        else:
            raise ConfigurationError(f"{path}: unknown backend '{meta['backend']}'")

        model = cls(
            backend,
            encoder_config,
            head_configs,
            schemas,
            meta["training"],
            loss_weights,
            model_id=meta["model_id"],
        )
        if model.fingerprint != meta["fingerprint"]:
            raise FingerprintError(
                f"{path}: stored fingerprint does not match the stored config"
            )
        return model
