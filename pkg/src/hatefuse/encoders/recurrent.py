"""BiLSTM / BiGRU trunk over a frozen static-embedding table.

The pooled representation is the concatenation of both directions' final
hidden states, so hidden_dim must be even. Embeddings stay fixed; the
recurrent weights train through full backprop-through-time, with the heavy
per-timestep loops living in :mod:`hatefuse.kernels`.
"""

from __future__ import annotations

import numpy as np

from .. import kernels
from ..hashing import stable_seed
from . import EncodedBatch, EncoderConfig
from .embeddings import Vocabulary, build_embedding_matrix

_GATES = {"bilstm": 4, "bigru": 3}
_DIRECTIONS = ("fwd", "bwd")


def _glorot(rng, fan_in: int, fan_out: int) -> np.ndarray:
    bound = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-bound, bound, size=(fan_in, fan_out))


class RecurrentTrunk:
    static = False

    def __init__(
        self,
        config: EncoderConfig,
        vocab: Vocabulary,
        embeddings: np.ndarray,
        params: dict[str, np.ndarray],
    ):
        self.config = config
        self.vocab = vocab
        self.embeddings = embeddings
        self._params = params
        self.units = config.hidden_dim // 2
        self.out_dim = config.hidden_dim
        if config.recurrent_cell == "bilstm":
            self._forward_kernel = kernels.lstm_forward
            self._backward_kernel = kernels.lstm_backward
        else:
            self._forward_kernel = kernels.gru_forward
            self._backward_kernel = kernels.gru_backward

    @classmethod
    def build(cls, config: EncoderConfig, corpus, seed: int = 0) -> "RecurrentTrunk":
        vocab = Vocabulary.fit(corpus)
        embeddings = build_embedding_matrix(
            vocab,
            config.embedding_dim,
            config.embedding_source,
            config.backbone_id,
            seed,
        )
        n_gates = _GATES[config.recurrent_cell]
        units = config.hidden_dim // 2
        params: dict[str, np.ndarray] = {}
        for direction in _DIRECTIONS:
            rng = np.random.default_rng(
                np.random.SeedSequence(stable_seed(seed, "rnn", direction))
            )
            params[f"{direction}.Wx"] = _glorot(rng, config.embedding_dim, n_gates * units)
            params[f"{direction}.Wh"] = _glorot(rng, units, n_gates * units)
            bias = np.zeros(n_gates * units)
            if config.recurrent_cell == "bilstm":
                bias[units : 2 * units] = 1.0  # forget gate opens at init
            params[f"{direction}.b"] = bias
        return cls(config, vocab, embeddings, params)

    def _batch_arrays(self, texts: list[str]):
        ids, lengths = self.vocab.encode_batch(texts, self.config.max_length)
        # reversed copy: valid tokens flipped in place, padding stays right
        ids_rev = np.zeros_like(ids)
        for b in range(ids.shape[0]):
            n = lengths[b]
            ids_rev[b, :n] = ids[b, :n][::-1]
        X_fwd = np.ascontiguousarray(self.embeddings[ids].transpose(1, 0, 2))
        X_bwd = np.ascontiguousarray(self.embeddings[ids_rev].transpose(1, 0, 2))
        return X_fwd, X_bwd, lengths

    def _run_direction(self, direction: str, X, lengths):
        p = self._params
        return self._forward_kernel(
            X, p[f"{direction}.Wx"], p[f"{direction}.Wh"], p[f"{direction}.b"], lengths
        )

    def forward_train(self, texts: list[str]):
        X_fwd, X_bwd, lengths = self._batch_arrays(texts)
        out_fwd = self._run_direction("fwd", X_fwd, lengths)
        out_bwd = self._run_direction("bwd", X_bwd, lengths)
        vectors = np.concatenate([out_fwd[0], out_bwd[0]], axis=1)
        cache = (X_fwd, X_bwd, lengths, out_fwd, out_bwd)
        return vectors, cache

    def backward(self, d_vectors, cache) -> dict[str, np.ndarray]:
        X_fwd, X_bwd, lengths, out_fwd, out_bwd = cache
        grads: dict[str, np.ndarray] = {}
        for direction, X, out, d_last in (
            ("fwd", X_fwd, out_fwd, d_vectors[:, : self.units]),
            ("bwd", X_bwd, out_bwd, d_vectors[:, self.units :]),
        ):
            p = self._params
            d_last = np.ascontiguousarray(d_last)
            if self.config.recurrent_cell == "bilstm":
                _, Hseq, Cseq, G = out
                dWx, dWh, db = self._backward_kernel(
                    d_last, X, p[f"{direction}.Wx"], p[f"{direction}.Wh"],
                    Hseq, Cseq, G, lengths,
                )
            else:
                _, Hseq, G = out
                dWx, dWh, db = self._backward_kernel(
                    d_last, X, p[f"{direction}.Wx"], p[f"{direction}.Wh"],
                    Hseq, G, lengths,
                )
            grads[f"{direction}.Wx"] = dWx
            grads[f"{direction}.Wh"] = dWh
            grads[f"{direction}.b"] = db
        return grads

    def encode(self, texts: list[str]) -> EncodedBatch:
        vectors, cache = self.forward_train(texts)
        lengths = cache[2]
        return EncodedBatch(vectors=vectors, attention_lengths=lengths)

    def params(self) -> dict[str, np.ndarray]:
        return self._params

    def state_arrays(self) -> dict[str, np.ndarray]:
        out = {"embeddings": self.embeddings}
        out.update({f"param.{k}": v for k, v in self._params.items()})
        return out

    def state_meta(self) -> dict:
        return {"vocab": list(self.vocab.words)}

    @classmethod
    def from_state(
        cls, config: EncoderConfig, meta: dict, arrays: dict[str, np.ndarray]
    ) -> "RecurrentTrunk":
        vocab = Vocabulary(meta["vocab"])
        embeddings = arrays["embeddings"]
        params = {
            k[len("param.") :]: np.array(v)
            for k, v in arrays.items()
            if k.startswith("param.")
        }
        return cls(config, vocab, embeddings, params)
