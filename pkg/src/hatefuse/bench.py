"""Benchmark the numba-compiled kernels against the pure-numpy fallbacks.

Run as ``hatefuse bench`` or ``python -m hatefuse.bench``. The first numba
call per kernel compiles; a warmup call is excluded from the timings.
"""

from __future__ import annotations

import time

import numpy as np

from . import kernels


def _time_best(fn, args, repeats: int) -> float:
    fn(*args)  # warmup / JIT compile
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def _ngram_args(n_texts=2000, text_len=120, dim=256, seed=0):
    rng = np.random.default_rng(seed)
    lengths = rng.integers(5, text_len, size=n_texts)
    offsets = np.zeros(n_texts + 1, dtype=np.int64)
    offsets[1:] = np.cumsum(lengths)
    codes = rng.integers(1, 0x0A00, size=int(offsets[-1]), dtype=np.int64)
    return codes, offsets, dim, 7, 1, 3


def _rnn_setup(cell: str, T=128, B=32, E=64, H=64, seed=0):
    rng = np.random.default_rng(seed)
    n_gates = 4 if cell == "lstm" else 3
    X = rng.normal(size=(T, B, E))
    Wx = rng.normal(scale=0.1, size=(E, n_gates * H))
    Wh = rng.normal(scale=0.1, size=(H, n_gates * H))
    b = np.zeros(n_gates * H)
    lengths = rng.integers(1, T + 1, size=B).astype(np.int64)
    dh = rng.normal(size=(B, H))
    return X, Wx, Wh, b, lengths, dh


def benchmark_rows(repeats: int = 3) -> list[dict]:
    """One row per kernel: seconds per flavor and the resulting speedup."""
    cases = []
    cases.append(("ngram_hash_counts", "ngram_hash_counts", _ngram_args(), None))
    for cell in ("lstm", "gru"):
        X, Wx, Wh, b, lengths, dh = _rnn_setup(cell)
        fwd_args = (X, Wx, Wh, b, lengths)
        cases.append((f"{cell}_forward", f"{cell}_forward", fwd_args, None))
        fwd = kernels.get_impl(f"{cell}_forward", "numpy")
        out = fwd(*fwd_args)
        if cell == "lstm":
            bwd_args = (dh, X, Wx, Wh, out[1], out[2], out[3], lengths)
        else:
            bwd_args = (dh, X, Wx, Wh, out[1], out[2], lengths)
        cases.append((f"{cell}_backward", f"{cell}_backward", bwd_args, None))

    rows = []
    for label, name, args, _ in cases:
        row: dict = {"kernel": label}
        row["numpy_s"] = _time_best(kernels.get_impl(name, "numpy"), args, repeats)
        try:
            row["numba_s"] = _time_best(kernels.get_impl(name, "numba"), args, repeats)
            row["speedup"] = row["numpy_s"] / row["numba_s"]
        except RuntimeError:
            row["numba_s"] = None
            row["speedup"] = None
        rows.append(row)
    return rows


def format_table(rows: list[dict]) -> str:
    lines = [
        f"active flavor: {kernels.active_flavor()} "
        "(set HATEFUSE_DISABLE_NUMBA=1 to force numpy)",
        "",
        f"{'kernel':<20} {'numpy (s)':>12} {'numba (s)':>12} {'speedup':>9}",
    ]
    for row in rows:
        numba_s = f"{row['numba_s']:.5f}" if row["numba_s"] is not None else "n/a"
        speedup = f"{row['speedup']:.1f}x" if row["speedup"] is not None else "n/a"
        lines.append(
            f"{row['kernel']:<20} {row['numpy_s']:>12.5f} {numba_s:>12} {speedup:>9}"
        )
    return "\n".join(lines)


def main(repeats: int = 3) -> None:
    print(format_table(benchmark_rows(repeats=repeats)))


if __name__ == "__main__":
    main()
