"""Torch twin of the numpy backend, for fine-tuning transformer backbones.

Same surface as NumpyBackend (train_step / predict_proba / state dicts) so
the orchestration loop in train.py drives either one unchanged.
"""

from __future__ import annotations

from typing import Mapping, Sequence

import numpy as np

from ..encoders import EncoderConfig
from ..encoders.transformer import resolve_backbone
from ..errors import ConfigurationError
from .heads import HeadConfig


class TorchBackend:
    kind = "torch"

    def __init__(self, encoder_config: EncoderConfig, head_configs: Sequence[HeadConfig]):
        import torch

        self.torch = torch
        self.encoder_config = encoder_config
        self.head_configs = list(head_configs)
        self.tasks = [hc.task_id for hc in self.head_configs]
        self.tokenizer, self.backbone = resolve_backbone(encoder_config.backbone_id)
        hidden = int(self.backbone.config.hidden_size)
        if encoder_config.hidden_dim is not None and encoder_config.hidden_dim != hidden:
            raise ConfigurationError(
                f"hidden_dim {encoder_config.hidden_dim} does not match backbone "
                f"hidden size {hidden}"
            )
        self.hidden = hidden
        self.heads = torch.nn.ModuleDict(
            {hc.task_id: torch.nn.Linear(hidden, hc.num_classes) for hc in head_configs}
        )
        for head in self.heads.values():
            torch.nn.init.zeros_(head.weight)
            torch.nn.init.zeros_(head.bias)
        self._optimizer = None

    @classmethod
    def create(cls, encoder_config, head_configs, seed: int, corpus) -> "TorchBackend":
        import torch

        torch.manual_seed(seed)
        return cls(encoder_config, head_configs)

    def setup_optimizer(self, learning_rate: float, weight_decay: float) -> None:
        params = list(self.backbone.parameters()) + list(self.heads.parameters())
        self._optimizer = self.torch.optim.AdamW(
            params, lr=learning_rate, weight_decay=weight_decay
        )

    def cache_features(self, texts) -> None:
        pass  # trunk is trainable; nothing to cache

    def _batch(self, texts: Sequence[str]):
        return self.tokenizer(
            list(texts),
            truncation=True,
            padding="max_length",
            max_length=self.encoder_config.max_length,
            return_tensors="pt",
        )

    def train_step(
        self,
        texts: Sequence[str],
        gold: Mapping[str, np.ndarray],
        task_weights: Mapping[str, float],
        row_slice=None,
    ) -> float:
        torch = self.torch
        if self._optimizer is None:
            raise ConfigurationError("optimizer not initialized; call setup_optimizer")
        self.backbone.train()
        self.heads.train()
        batch = self._batch(texts)
        pooled = self.backbone(**batch).last_hidden_state[:, 0, :]
        loss = pooled.new_zeros(())
        for task in self.tasks:
            logits = self.heads[task](pooled)
            target = torch.as_tensor(np.asarray(gold[task]), dtype=torch.long)
            loss = loss + task_weights[task] * torch.nn.functional.cross_entropy(
                logits, target
            )
        self._optimizer.zero_grad()
        loss.backward()
        self._optimizer.step()
        return float(loss.detach())

    def predict_proba(self, texts: Sequence[str], batch_size: int = 16):
        torch = self.torch
        self.backbone.eval()
        self.heads.eval()
        texts = list(texts)
        chunks: dict[str, list[np.ndarray]] = {task: [] for task in self.tasks}
        with torch.no_grad():
            for start in range(0, len(texts), batch_size):
                batch = self._batch(texts[start : start + batch_size])
                pooled = self.backbone(**batch).last_hidden_state[:, 0, :]
                for task in self.tasks:
                    probs = torch.softmax(self.heads[task](pooled), dim=1)
                    chunks[task].append(probs.numpy().astype(np.float64))
        out = {}
        for task, hc in zip(self.tasks, self.head_configs):
            if chunks[task]:
                out[task] = np.concatenate(chunks[task], axis=0)
            else:
                out[task] = np.zeros((0, hc.num_classes))
        return out

    def state_arrays(self) -> dict[str, np.ndarray]:
        arrays = {}
        for key, tensor in self.backbone.state_dict().items():
            arrays[f"backbone.{key}"] = tensor.numpy()
        for key, tensor in self.heads.state_dict().items():
            arrays[f"heads.{key}"] = tensor.numpy()
        return arrays

    def state_meta(self) -> dict:
        return {}

    @classmethod
    def from_state(cls, encoder_config, head_configs, meta, arrays) -> "TorchBackend":
        backend = cls(encoder_config, head_configs)
        torch = backend.torch
        backbone_state = {
            k[len("backbone.") :]: torch.as_tensor(np.array(v))
            for k, v in arrays.items()
            if k.startswith("backbone.")
        }
        heads_state = {
            k[len("heads.") :]: torch.as_tensor(np.array(v))
            for k, v in arrays.items()
            if k.startswith("heads.")
        }
        backend.backbone.load_state_dict(backbone_state)
        backend.heads.load_state_dict(heads_state)
        return backend
