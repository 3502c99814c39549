import os
import subprocess
import sys

import numpy as np
import pytest

from hatefuse import kernels

RNG = np.random.default_rng(42)

FNV_OFFSET = 14695981039346656037
FNV_PRIME = 1099511628211
MASK = (1 << 64) - 1


def fnv_oracle(codes, seed, n):
    """Independent python-int FNV-1a with explicit 64-bit wraparound."""
    h = ((FNV_OFFSET ^ seed) * FNV_PRIME) & MASK
    h = ((h ^ n) * FNV_PRIME) & MASK
    for code in codes:
        h = ((h ^ code) * FNV_PRIME) & MASK
    return h


def ngram_counts_oracle(texts, dim, seed, n_min=1, n_max=3):
    counts = np.zeros((len(texts), dim))
    for b, text in enumerate(texts):
        codes = [ord(ch) for ch in text]
        for n in range(n_min, n_max + 1):
            for i in range(len(codes) - n + 1):
                counts[b, fnv_oracle(codes[i : i + n], seed, n) % dim] += 1
    return counts


def pack(texts):
    offsets = np.zeros(len(texts) + 1, dtype=np.int64)
    offsets[1:] = np.cumsum([len(t) for t in texts])
    codes = np.fromiter(
        (ord(c) for t in texts for c in t), dtype=np.int64, count=int(offsets[-1])
    )
    return codes, offsets


def rnn_inputs(cell, T=10, B=4, E=5, H=3, seed=1):
    rng = np.random.default_rng(seed)
    n_gates = 4 if cell == "lstm" else 3
    X = rng.normal(size=(T, B, E))
    Wx = rng.normal(scale=0.4, size=(E, n_gates * H))
    Wh = rng.normal(scale=0.4, size=(H, n_gates * H))
    b = rng.normal(scale=0.1, size=n_gates * H)
    lengths = np.array([T, 0, 3, 7], dtype=np.int64)[:B]
    return X, Wx, Wh, b, lengths


class TestNgramHash:
    def test_matches_independent_oracle(self):
        texts = ["ab", "", "hello world", "ভালো ১২"]
        codes, offsets = pack(texts)
        expected = ngram_counts_oracle(texts, dim=32, seed=9)
        for flavor in ("numpy", "numba"):
            got = kernels.get_impl("ngram_hash_counts", flavor)(codes, offsets, 32, 9, 1, 3)
            assert np.array_equal(got, expected), flavor

    def test_flavors_exactly_equal_on_random_input(self):
        lengths = RNG.integers(0, 60, size=200)
        offsets = np.zeros(201, dtype=np.int64)
        offsets[1:] = np.cumsum(lengths)
        codes = RNG.integers(0, 0x110000, size=int(offsets[-1]), dtype=np.int64)
        a = kernels.get_impl("ngram_hash_counts", "numpy")(codes, offsets, 128, 7, 1, 3)
        b = kernels.get_impl("ngram_hash_counts", "numba")(codes, offsets, 128, 7, 1, 3)
        assert np.array_equal(a, b)

    def test_seed_changes_buckets(self):
        codes, offsets = pack(["abcdef"])
        a = kernels.ngram_hash_counts(codes, offsets, 64, 0, 1, 3)
        b = kernels.ngram_hash_counts(codes, offsets, 64, 1, 1, 3)
        assert not np.array_equal(a, b)
        assert a.sum() == b.sum()  # same number of n-grams, different buckets

    def test_total_ngram_count(self):
        codes, offsets = pack(["abcd"])  # 4 + 3 + 2 windows
        counts = kernels.ngram_hash_counts(codes, offsets, 16, 0, 1, 3)
        assert counts.sum() == 9


@pytest.mark.parametrize("cell", ["lstm", "gru"])
class TestRecurrences:
    def test_flavors_agree(self, cell):
        X, Wx, Wh, b, lengths = rnn_inputs(cell)
        out_np = kernels.get_impl(f"{cell}_forward", "numpy")(X, Wx, Wh, b, lengths)
        out_nb = kernels.get_impl(f"{cell}_forward", "numba")(X, Wx, Wh, b, lengths)
        for a, c in zip(out_np, out_nb):
            assert np.allclose(a, c, atol=1e-12)
        dh = np.random.default_rng(3).normal(size=out_np[0].shape)
        args_np = (dh, X, Wx, Wh, *out_np[1:], lengths)
        g_np = kernels.get_impl(f"{cell}_backward", "numpy")(*args_np)
        g_nb = kernels.get_impl(f"{cell}_backward", "numba")(*args_np)
        for a, c in zip(g_np, g_nb):
            assert np.allclose(a, c, atol=1e-12)

    def test_final_state_is_last_valid_step(self, cell):
        X, Wx, Wh, b, _ = rnn_inputs(cell, T=8, B=4)
        forward = kernels.get_impl(f"{cell}_forward", "numpy")
        lengths = np.array([3, 3, 3, 3], dtype=np.int64)
        h_padded = forward(X, Wx, Wh, b, lengths)[0]
        h_exact = forward(
            np.ascontiguousarray(X[:3]), Wx, Wh, b, lengths
        )[0]
        assert np.allclose(h_padded, h_exact, atol=1e-15)

    def test_zero_length_gives_zero_state(self, cell):
        X, Wx, Wh, b, _ = rnn_inputs(cell, B=2)
        lengths = np.array([0, 5], dtype=np.int64)
        h = kernels.get_impl(f"{cell}_forward", "numpy")(X, Wx, Wh, b, lengths)[0]
        assert np.all(h[0] == 0.0)
        assert np.any(h[1] != 0.0)

    def test_gradients_match_finite_differences(self, cell):
        X, Wx, Wh, b, lengths = rnn_inputs(cell, T=6, B=3, E=4, H=3)
        forward = kernels.get_impl(f"{cell}_forward", "numpy")
        backward = kernels.get_impl(f"{cell}_backward", "numpy")
        rng = np.random.default_rng(11)
        dh = rng.normal(size=(3, 3))
        out = forward(X, Wx, Wh, b, lengths)
        grads = backward(dh, X, Wx, Wh, *out[1:], lengths)

        def loss():
            return float((forward(X, Wx, Wh, b, lengths)[0] * dh).sum())

        eps = 1e-6
        for arr, analytic in zip((Wx, Wh, b), grads):
            flat = arr.reshape(-1)
            picks = rng.choice(flat.size, size=min(10, flat.size), replace=False)
            for i in picks:
                orig = flat[i]
                flat[i] = orig + eps
                up = loss()
                flat[i] = orig - eps
                down = loss()
                flat[i] = orig
                numeric = (up - down) / (2 * eps)
                assert abs(analytic.reshape(-1)[i] - numeric) <= 1e-5 * max(
                    1.0, abs(numeric)
                )


class TestFlavorSelection:
    def test_numba_active_by_default(self):
        assert kernels.active_flavor() == "numba"

    def test_env_flag_forces_numpy(self):
        code = "from hatefuse import kernels; print(kernels.active_flavor())"
        env = dict(os.environ, HATEFUSE_DISABLE_NUMBA="1")
        out = subprocess.run(
            [sys.executable, "-c", code], env=env, capture_output=True, text=True
        )
        assert out.stdout.strip() == "numpy"

    def test_unknown_kernel_or_flavor(self):
        with pytest.raises(KeyError):
            kernels.get_impl("nope", "numpy")
        with pytest.raises(ValueError):
            kernels.get_impl("lstm_forward", "fortran")


def test_benchmark_rows_smoke():
    from hatefuse.bench import benchmark_rows, format_table

    rows = benchmark_rows(repeats=1)
    assert {r["kernel"] for r in rows} == {
        "ngram_hash_counts",
        "lstm_forward",
        "lstm_backward",
        "gru_forward",
        "gru_backward",
    }
    table = format_table(rows)
    assert "speedup" in table
