"""Numpy training backend: shared trunk plus one affine head per task.

Covers the toy and recurrent encoder families. The transformer family has
a torch twin in :mod:`hatefuse.model.torch_backend` with the same surface.
"""

from __future__ import annotations

from typing import Mapping, Sequence

import numpy as np

from ..encoders import EncoderConfig, build_trunk
from ..errors import ConfigurationError
from .heads import ClassifierHead, HeadConfig, softmax
from .losses import softmax_xent_grad
from .optim import AdamW


class NumpyBackend:
    kind = "numpy"

    def __init__(self, encoder_config: EncoderConfig, head_configs, trunk, heads):
        self.encoder_config = encoder_config
        self.head_configs = list(head_configs)
        self.trunk = trunk
        self.heads: dict[str, ClassifierHead] = heads
        self.tasks = [hc.task_id for hc in self.head_configs]
        self._optimizer: AdamW | None = None
        self._feature_cache: dict[int, np.ndarray] | None = None

    @classmethod
    def create(
        cls,
        encoder_config: EncoderConfig,
        head_configs: Sequence[HeadConfig],
        seed: int,
        corpus: Sequence[str],
    ) -> "NumpyBackend":
        trunk = build_trunk(encoder_config, seed=seed, corpus=list(corpus))
        heads = {
            hc.task_id: ClassifierHead(hc, trunk.out_dim) for hc in head_configs
        }
        return cls(encoder_config, head_configs, trunk, heads)

    def _all_params(self) -> dict[str, np.ndarray]:
        params: dict[str, np.ndarray] = {}
        for task, head in self.heads.items():
            params[f"head.{task}.weight"] = head.weight
            params[f"head.{task}.bias"] = head.bias
        for name, arr in self.trunk.params().items():
            params[f"trunk.{name}"] = arr
        return params

    def setup_optimizer(self, learning_rate: float, weight_decay: float) -> None:
        self._optimizer = AdamW(
            self._all_params(), learning_rate=learning_rate, weight_decay=weight_decay
        )

    def cache_features(self, texts: Sequence[str]) -> None:
        """Precompute trunk features once when the trunk is frozen."""
        if self.trunk.static:
            vectors, _ = self.trunk.forward_train(list(texts))
            self._feature_cache = {"vectors": vectors}

    def train_step(
        self,
        texts: Sequence[str],
        gold: Mapping[str, np.ndarray],
        task_weights: Mapping[str, float],
        row_slice: np.ndarray | None = None,
    ) -> float:
        """One AdamW step on a batch; returns the weighted loss value."""
        if self._optimizer is None:
            raise ConfigurationError("optimizer not initialized; call setup_optimizer")
        if self._feature_cache is not None and row_slice is not None:
            vectors = self._feature_cache["vectors"][row_slice]
            cache = None
        else:
            vectors, cache = self.trunk.forward_train(list(texts))

        total_loss = 0.0
        grads: dict[str, np.ndarray] = {}
        d_vectors = np.zeros_like(vectors)
        for task in self.tasks:
            weight = task_weights[task]
            head = self.heads[task]
            logits = head.logits(vectors)
            loss, dlogits = softmax_xent_grad(logits, gold[task])
            total_loss += weight * loss
            dlogits = dlogits * weight
            grads[f"head.{task}.weight"] = vectors.T @ dlogits
            grads[f"head.{task}.bias"] = dlogits.sum(axis=0)
            d_vectors += dlogits @ head.weight.T

        if cache is not None:
            for name, grad in self.trunk.backward(d_vectors, cache).items():
                grads[f"trunk.{name}"] = grad
        self._optimizer.step(grads)
        return float(total_loss)

    def predict_proba(self, texts: Sequence[str], batch_size: int = 64):
        """Per-task probability matrices, batched to bound memory."""
        texts = list(texts)
        chunks: dict[str, list[np.ndarray]] = {task: [] for task in self.tasks}
        for start in range(0, len(texts), batch_size):
            vectors, _ = self.trunk.forward_train(texts[start : start + batch_size])
            for task in self.tasks:
                chunks[task].append(softmax(self.heads[task].logits(vectors)))
        out = {}
        for task in self.tasks:
            if chunks[task]:
                out[task] = np.concatenate(chunks[task], axis=0)
            else:
                out[task] = np.zeros((0, self.heads[task].config.num_classes))
        return out

    def state_arrays(self) -> dict[str, np.ndarray]:
        arrays: dict[str, np.ndarray] = {}
        for task, head in self.heads.items():
            arrays[f"head.{task}.weight"] = head.weight
            arrays[f"head.{task}.bias"] = head.bias
        for name, arr in self.trunk.state_arrays().items():
            arrays[f"trunk.{name}"] = arr
        return arrays

    def state_meta(self) -> dict:
        return {"trunk": self.trunk.state_meta()}

    @classmethod
    def from_state(
        cls,
        encoder_config: EncoderConfig,
        head_configs: Sequence[HeadConfig],
        meta: dict,
        arrays: Mapping[str, np.ndarray],
    ) -> "NumpyBackend":
        if encoder_config.family == "toy":
            from ..encoders.toy import ToyTrunk

            trunk = ToyTrunk(encoder_config)
        elif encoder_config.family == "recurrent":
            from ..encoders.recurrent import RecurrentTrunk

            trunk_arrays = {
                k[len("trunk.") :]: np.array(v)
                for k, v in arrays.items()
                if k.startswith("trunk.")
            }
            trunk = RecurrentTrunk.from_state(
                encoder_config, meta["trunk"], trunk_arrays
            )
        else:
            raise ConfigurationError(
                f"numpy backend cannot host encoder family '{encoder_config.family}'"
            )
        heads = {}
        for hc in head_configs:
            head = ClassifierHead(hc, trunk.out_dim)
            head.weight = np.array(arrays[f"head.{hc.task_id}.weight"])
            head.bias = np.array(arrays[f"head.{hc.task_id}.bias"])
            heads[hc.task_id] = head
        return cls(encoder_config, head_configs, trunk, heads)
