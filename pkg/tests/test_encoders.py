import numpy as np
import pytest

from hatefuse.encoders import EncodedBatch, EncoderConfig, build_trunk, encode, tokenize_truncate
from hatefuse.encoders.embeddings import Vocabulary, build_embedding_matrix, load_word_vectors
from hatefuse.encoders.recurrent import RecurrentTrunk
from hatefuse.encoders.toy import hash_features
from hatefuse.errors import ConfigurationError, ValidationError

from helpers import separable_split

TOY = EncoderConfig(family="toy", hidden_dim=8)


def fnv_vector_oracle(text, dim, seed=0):
    """Independent recomputation of the toy feature hash."""
    mask = (1 << 64) - 1
    offset, prime = 14695981039346656037, 1099511628211
    counts = np.zeros(dim)
    codes = [ord(c) for c in text]
    for n in (1, 2, 3):
        for i in range(len(codes) - n + 1):
            h = ((offset ^ seed) * prime) & mask
            h = ((h ^ n) * prime) & mask
            for code in codes[i : i + n]:
                h = ((h ^ code) * prime) & mask
            counts[h % dim] += 1
    norm = np.sqrt((counts**2).sum())
    return counts / norm if norm else counts


class TestEncoderConfig:
    def test_toy_requires_hidden_dim(self):
        with pytest.raises(ConfigurationError, match="hidden_dim"):
            EncoderConfig(family="toy")

    def test_toy_forbids_recurrent_fields(self):
        with pytest.raises(ConfigurationError, match="recurrent_cell"):
            EncoderConfig(family="toy", hidden_dim=8, recurrent_cell="bilstm")

    def test_unknown_family(self):
        with pytest.raises(ConfigurationError, match="family"):
            EncoderConfig(family="cnn", hidden_dim=8)

    def test_recurrent_requires_even_hidden(self):
        with pytest.raises(ConfigurationError, match="even"):
            EncoderConfig(
                family="recurrent",
                hidden_dim=7,
                recurrent_cell="bilstm",
                embedding_source="random",
            )

    def test_recurrent_glove_requires_path(self):
        with pytest.raises(ConfigurationError, match="backbone_id"):
            EncoderConfig(
                family="recurrent",
                hidden_dim=8,
                recurrent_cell="bigru",
                embedding_source="glove",
            )

    def test_transformer_requires_backbone(self):
        with pytest.raises(ConfigurationError, match="backbone_id"):
            EncoderConfig(family="transformer")

    def test_max_length_bound(self):
        with pytest.raises(ConfigurationError, match="max_length"):
            EncoderConfig(family="toy", hidden_dim=8, max_length=0)

    def test_round_trip_dict(self):
        config = EncoderConfig(
            family="recurrent",
            hidden_dim=16,
            recurrent_cell="bigru",
            embedding_source="random",
            embedding_dim=12,
        )
        assert EncoderConfig.from_dict(config.to_dict()) == config


class TestTokenizeTruncate:
    def test_long_text_exactly_max_length(self):
        config = EncoderConfig(family="toy", hidden_dim=8, max_length=128)
        ids = tokenize_truncate("x" * 300, config)
        assert ids.shape == (128,)
        assert (ids != 0).sum() == 128

    def test_empty_text_all_padding(self):
        ids = tokenize_truncate("", TOY)
        assert ids.shape == (TOY.max_length,)
        assert (ids == 0).all()

    def test_short_text_padded(self):
        ids = tokenize_truncate("abcde", TOY)
        assert (ids != 0).sum() == 5
        assert (ids[5:] == 0).all()

    def test_recurrent_needs_vocab(self):
        config = EncoderConfig(
            family="recurrent",
            hidden_dim=8,
            recurrent_cell="bilstm",
            embedding_source="random",
        )
        with pytest.raises(ConfigurationError, match="vocab"):
            tokenize_truncate("a b c", config)
        vocab = Vocabulary.fit(["a b c"])
        ids = tokenize_truncate("a b zz", config, vocab=vocab)
        assert (ids != 0).sum() == 3
        assert ids[2] == 1  # unseen word maps to the shared UNK slot


class TestToyEncoder:
    def test_deterministic_across_calls(self):
        a = encode(["same text", "other"], TOY)
        b = encode(["same text", "other"], TOY)
        assert np.array_equal(a.vectors, b.vectors)

    def test_frozen_fixture_matches_oracle(self):
        batch = encode(["ab"], TOY)
        assert np.allclose(batch.vectors[0], fnv_vector_oracle("ab", 8), atol=1e-15)

    def test_batch_of_16(self):
        batch = encode([f"text {i}" for i in range(16)], TOY)
        assert batch.batch_size == 16
        assert batch.vectors.shape == (16, 8)

    def test_rows_unit_norm(self):
        batch = encode(["hello", "ভালো"], TOY)
        assert np.allclose(np.linalg.norm(batch.vectors, axis=1), 1.0)

    def test_empty_text_zero_vector(self):
        batch = encode([""], TOY)
        assert np.all(batch.vectors == 0.0)
        assert batch.attention_lengths[0] == 0

    def test_permutation_equivariance(self):
        texts = [f"item {i} {'x' * i}" for i in range(10)]
        base = encode(texts, TOY).vectors
        perm = [7, 2, 9, 0, 1, 5, 3, 8, 4, 6]
        shuffled = encode([texts[i] for i in perm], TOY).vectors
        assert np.array_equal(shuffled, base[perm])

    def test_hash_seed_changes_vectors(self):
        other = EncoderConfig(family="toy", hidden_dim=8, hash_seed=99)
        a = encode(["hello"], TOY).vectors
        b = encode(["hello"], other).vectors
        assert not np.array_equal(a, b)

    def test_truncation_limits_features(self):
        short_cfg = EncoderConfig(family="toy", hidden_dim=32, max_length=4)
        a = hash_features(["abcdXYZ"], short_cfg)
        b = hash_features(["abcd"], short_cfg)
        assert np.array_equal(a, b)


class TestEncodedBatch:
    def test_rejects_nan(self):
        with pytest.raises(ConfigurationError, match="NaN"):
            EncodedBatch(np.array([[np.nan, 1.0]]), np.array([1]))

    def test_rejects_length_mismatch(self):
        with pytest.raises(ConfigurationError, match="per batch item"):
            EncodedBatch(np.zeros((2, 3)), np.array([1]))

    def test_vectors_read_only(self):
        batch = encode(["abc"], TOY)
        with pytest.raises(ValueError):
            batch.vectors[0, 0] = 5.0


class TestEmbeddings:
    def test_vocab_fit_first_seen_order(self):
        vocab = Vocabulary.fit(["b a", "a c"])
        assert vocab.words == ("b", "a", "c")
        assert vocab.id_of("b") == 2  # after pad and unk

    def test_load_word_vectors(self, tmp_path):
        path = tmp_path / "vecs.txt"
        path.write_text("hello 0.1 0.2\nworld -1 2\n", encoding="utf-8")
        table = load_word_vectors(path, expected_dim=2)
        assert np.allclose(table["hello"], [0.1, 0.2])

    def test_load_skips_fasttext_header(self, tmp_path):
        path = tmp_path / "vecs.txt"
        path.write_text("2 2\na 1 2\nb 3 4\n", encoding="utf-8")
        assert set(load_word_vectors(path)) == {"a", "b"}

    def test_load_rejects_bad_dim(self, tmp_path):
        path = tmp_path / "vecs.txt"
        path.write_text("a 1 2 3\n", encoding="utf-8")
        with pytest.raises(ValidationError, match="dimension"):
            load_word_vectors(path, expected_dim=2)

    def test_load_rejects_bad_float(self, tmp_path):
        path = tmp_path / "vecs.txt"
        path.write_text("a 1 x\n", encoding="utf-8")
        with pytest.raises(ValidationError, match=":1"):
            load_word_vectors(path)

    def test_missing_file_is_config_error(self):
        with pytest.raises(ConfigurationError):
            load_word_vectors("/nonexistent/vectors.txt")

    def test_matrix_uses_file_vectors(self, tmp_path):
        path = tmp_path / "vecs.txt"
        path.write_text("known 1 2 3\n", encoding="utf-8")
        vocab = Vocabulary(["known", "unknown"])
        matrix = build_embedding_matrix(vocab, 3, "glove", str(path), seed=0)
        assert np.allclose(matrix[vocab.id_of("known")], [1, 2, 3])
        assert not np.allclose(matrix[vocab.id_of("unknown")], [1, 2, 3])
        assert np.all(matrix[0] == 0.0)  # pad row


@pytest.mark.parametrize("cell", ["bilstm", "bigru"])
class TestRecurrentTrunk:
    def config(self, cell):
        return EncoderConfig(
            family="recurrent",
            hidden_dim=12,
            recurrent_cell=cell,
            embedding_source="random",
            embedding_dim=6,
            max_length=16,
        )

    def test_encode_shape_and_determinism(self, cell):
        texts = ["a b c", "d e", ""]
        trunk = build_trunk(self.config(cell), seed=3, corpus=texts)
        batch = trunk.encode(texts)
        assert batch.vectors.shape == (3, 12)
        assert np.array_equal(batch.vectors, trunk.encode(texts).vectors)
        assert list(batch.attention_lengths) == [3, 2, 0]

    def test_same_seed_same_trunk(self, cell):
        texts = ["a b", "c"]
        a = build_trunk(self.config(cell), seed=5, corpus=texts).encode(texts)
        b = build_trunk(self.config(cell), seed=5, corpus=texts).encode(texts)
        assert np.array_equal(a.vectors, b.vectors)

    def test_permutation_equivariance(self, cell):
        texts = [f"w{i} w{(i + 1) % 5}" for i in range(6)]
        trunk = build_trunk(self.config(cell), seed=0, corpus=texts)
        base = trunk.encode(texts).vectors
        perm = [3, 0, 5, 1, 4, 2]
        assert np.allclose(trunk.encode([texts[i] for i in perm]).vectors, base[perm])

    def test_trainable_gradients_match_finite_differences(self, cell):
        texts = ["a b c d", "b a", "c"]
        trunk = build_trunk(self.config(cell), seed=1, corpus=texts)
        rng = np.random.default_rng(0)
        vectors, cache = trunk.forward_train(texts)
        d_vec = rng.normal(size=vectors.shape)
        grads = trunk.backward(d_vec, cache)

        def loss():
            out, _ = trunk.forward_train(texts)
            return float((out * d_vec).sum())

        eps = 1e-6
        for name, grad in grads.items():
            param = trunk.params()[name]
            flat = param.reshape(-1)
            for i in rng.choice(flat.size, size=5, replace=False):
                orig = flat[i]
                flat[i] = orig + eps
                up = loss()
                flat[i] = orig - eps
                down = loss()
                flat[i] = orig
                numeric = (up - down) / (2 * eps)
                assert abs(grad.reshape(-1)[i] - numeric) <= 1e-5 * max(1, abs(numeric)), name

    def test_state_round_trip(self, cell):
        texts = ["a b", "c d e"]
        trunk = build_trunk(self.config(cell), seed=2, corpus=texts)
        rebuilt = RecurrentTrunk.from_state(
            self.config(cell), trunk.state_meta(), trunk.state_arrays()
        )
        assert np.array_equal(
            trunk.encode(texts).vectors, rebuilt.encode(texts).vectors
        )


def test_separable_split_helper_has_consistent_labels():
    split = separable_split(24)
    for sample in split.samples:
        assert set(sample.gold) == {"type", "severity", "target"}
