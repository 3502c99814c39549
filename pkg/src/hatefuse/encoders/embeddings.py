"""Static word embeddings: vocabulary fitting and vector-file loading.

Vector files are UTF-8 plain text, one entry per line: the word followed by
its float components, space separated (the common glove/fasttext layout).
A leading "count dim" header line is tolerated and skipped.
"""

from __future__ import annotations

import numpy as np

from ..errors import ConfigurationError, ValidationError
from ..hashing import stable_seed

PAD_ID = 0
UNK_ID = 1
_RESERVED = ("<pad>", "<unk>")


def split_tokens(text: str) -> list[str]:
    return text.split()


class Vocabulary:
    """Word-to-id mapping with reserved padding (0) and unknown (1) slots."""

    def __init__(self, words: list[str]):
        self.words = tuple(words)
        self._index = {w: i + len(_RESERVED) for i, w in enumerate(self.words)}

    def __len__(self) -> int:
        return len(self.words) + len(_RESERVED)

    @classmethod
    def fit(cls, texts) -> "Vocabulary":
        """First-seen token order over the corpus; deterministic."""
        seen: dict[str, None] = {}
        for text in texts:
            for token in split_tokens(text):
                if token not in seen:
                    seen[token] = None
        return cls(list(seen))

    def id_of(self, token: str) -> int:
        return self._index.get(token, UNK_ID)

    def token_ids(self, text: str, max_length: int) -> np.ndarray:
        ids = np.zeros(max_length, dtype=np.int64)
        tokens = split_tokens(text)[:max_length]
        for i, token in enumerate(tokens):
            ids[i] = self.id_of(token)
        return ids

    def encode_batch(self, texts: list[str], max_length: int):
        ids = np.zeros((len(texts), max_length), dtype=np.int64)
        lengths = np.zeros(len(texts), dtype=np.int64)
        for b, text in enumerate(texts):
            row = self.token_ids(text, max_length)
            ids[b] = row
            lengths[b] = min(len(split_tokens(text)), max_length)
        return ids, lengths


def load_word_vectors(path: str, expected_dim: int | None = None) -> dict[str, np.ndarray]:
    """Parse a plain-text vector file into {word: float64 vector}."""
    table: dict[str, np.ndarray] = {}
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise ConfigurationError(f"embedding file could not be opened: {exc}") from None
    with fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.rstrip("\n").split(" ")
            if lineno == 1 and len(parts) == 2:
                try:
                    int(parts[0]), int(parts[1])
                    continue  # fasttext-style header
                except ValueError:
                    pass
            if len(parts) < 2:
                continue
            word = parts[0]
            try:
                vec = np.array([float(x) for x in parts[1:] if x != ""], dtype=np.float64)
            except ValueError:
                raise ValidationError(
                    f"{path}:{lineno}: malformed embedding row for word '{word}'"
                ) from None
            if expected_dim is not None and vec.shape[0] != expected_dim:
                raise ValidationError(
                    f"{path}:{lineno}: vector for '{word}' has dimension "
                    f"{vec.shape[0]}, expected {expected_dim}"
                )
            table[word] = vec
    if not table:
        raise ValidationError(f"{path}: no embedding rows found")
    return table


def build_embedding_matrix(
    vocab: Vocabulary,
    dim: int,
    source: str,
    vector_path: str | None,
    seed: int,
) -> np.ndarray:
    """(V, dim) table: row 0 is the zero pad vector, row 1 the shared UNK.

    Vocabulary words missing from the vector file (and the UNK row) are
    drawn from a seeded normal so runs are reproducible.
    """
    rng = np.random.default_rng(np.random.SeedSequence(stable_seed(seed, "embeddings")))
    matrix = rng.normal(0.0, 0.1, size=(len(vocab), dim))
    matrix[PAD_ID] = 0.0
    if source in ("glove", "fasttext"):
        vectors = load_word_vectors(vector_path, expected_dim=dim)
        for i, word in enumerate(vocab.words):
            if word in vectors:
                matrix[i + len(_RESERVED)] = vectors[word]
    elif source != "random":
        raise ConfigurationError(f"unknown embedding source '{source}'")
    return matrix
