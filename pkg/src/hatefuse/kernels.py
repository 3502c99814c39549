"""Hot numeric kernels: n-gram feature hashing and BiLSTM/BiGRU recurrences.

Each kernel exists in two flavors:

* ``numba``: the reference source compiled with ``@njit`` (no fastmath, so
  results track the numpy flavor to float rounding).
* ``numpy``: a pure-numpy path. For the recurrences this is the same source
  executed as plain Python (the per-timestep math is vectorized, so only the
  T-step loop is interpreted); the hash kernel has a dedicated vectorized
  variant because its inner loop is scalar.

Set ``HATEFUSE_DISABLE_NUMBA=1`` to force the numpy flavor everywhere.
``hatefuse bench`` times the two flavors against each other.

Array layout for the recurrences is time-major: X is (T, B, E), gate blocks
are ordered [i, f, g, o] for the LSTM and [z, r, n] for the GRU. Sequences
shorter than T carry their state unchanged through padded steps, so the
"final" state per item is the state at its last valid step.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dep, but stay usable
    _HAVE_NUMBA = False

_DISABLED = os.environ.get("HATEFUSE_DISABLE_NUMBA", "").strip().lower() in {
    "1",
    "true",
    "yes",
}
NUMBA_ENABLED = _HAVE_NUMBA and not _DISABLED

_FNV_OFFSET = 14695981039346656037
_FNV_PRIME = 1099511628211
_MASK64 = (1 << 64) - 1


def _ngram_hash_counts_scalar(codes, offsets, dim, seed, n_min, n_max):
    # njit flavor: FNV-1a over (seed, n, window) per position, scalar uint64.
    n_texts = offsets.shape[0] - 1
    counts = np.zeros((n_texts, dim), dtype=np.float64)
    prime = np.uint64(_FNV_PRIME)
    seed_mixed = (np.uint64(_FNV_OFFSET) ^ np.uint64(seed)) * prime
    udim = np.uint64(dim)
    for b in range(n_texts):
        start = offsets[b]
        stop = offsets[b + 1]
        length = stop - start
        for n in range(n_min, n_max + 1):
            if length < n:
                continue
            base = (seed_mixed ^ np.uint64(n)) * prime
            for i in range(start, stop - n + 1):
                h = base
                for k in range(i, i + n):
                    h = (h ^ np.uint64(codes[k])) * prime
                counts[b, np.int64(h % udim)] += 1.0
    return counts


def _ngram_hash_counts_numpy(codes, offsets, dim, seed, n_min, n_max):
    # numpy flavor: rolling FNV-1a over all window positions at once.
    n_texts = offsets.shape[0] - 1
    counts = np.zeros((n_texts, dim), dtype=np.float64)
    codes_u = codes.astype(np.uint64)
    prime = np.uint64(_FNV_PRIME)
    seed_mixed = ((_FNV_OFFSET ^ (seed & _MASK64)) * _FNV_PRIME) & _MASK64
    for b in range(n_texts):
        seq = codes_u[offsets[b] : offsets[b + 1]]
        length = seq.shape[0]
        for n in range(n_min, n_max + 1):
            if length < n:
                continue
            base = ((seed_mixed ^ n) * _FNV_PRIME) & _MASK64
            hashes = np.full(length - n + 1, np.uint64(base), dtype=np.uint64)
            for k in range(n):
                hashes = (hashes ^ seq[k : k + length - n + 1]) * prime
            np.add.at(counts[b], (hashes % np.uint64(dim)).astype(np.int64), 1.0)
    return counts


def _lstm_forward_impl(X, Wx, Wh, b, lengths):
    """One-direction LSTM over padded batch; returns final state and caches."""
    T, B, _ = X.shape
    H = Wh.shape[0]
    Hseq = np.zeros((T, B, H))
    Cseq = np.zeros((T, B, H))
    G = np.zeros((T, B, 4 * H))
    h = np.zeros((B, H))
    c = np.zeros((B, H))
    for t in range(T):
        A = X[t] @ Wx + h @ Wh + b
        gi = 1.0 / (1.0 + np.exp(-A[:, :H]))
        gf = 1.0 / (1.0 + np.exp(-A[:, H : 2 * H]))
        gg = np.tanh(A[:, 2 * H : 3 * H])
        go = 1.0 / (1.0 + np.exp(-A[:, 3 * H :]))
        c_new = gf * c + gi * gg
        h_new = go * np.tanh(c_new)
        m = (lengths > t).astype(np.float64).reshape(B, 1)
        h = m * h_new + (1.0 - m) * h
        c = m * c_new + (1.0 - m) * c
        G[t, :, :H] = gi
        G[t, :, H : 2 * H] = gf
        G[t, :, 2 * H : 3 * H] = gg
        G[t, :, 3 * H :] = go
        Hseq[t] = h
        Cseq[t] = c
    return h, Hseq, Cseq, G


def _lstm_backward_impl(dh_last, X, Wx, Wh, Hseq, Cseq, G, lengths):
    """Backprop through _lstm_forward_impl; gradient enters at final states."""
    T, B, _ = X.shape
    H = Wh.shape[0]
    dWx = np.zeros_like(Wx)
    dWh = np.zeros_like(Wh)
    db = np.zeros(4 * H)
    dh = np.zeros((B, H))
    dc = np.zeros((B, H))
    WhT = np.ascontiguousarray(Wh.T)
    zero = np.zeros((B, H))
    for t in range(T - 1, -1, -1):
        inject = (lengths - 1 == t).astype(np.float64).reshape(B, 1)
        dh_t = dh + inject * dh_last
        m = (lengths > t).astype(np.float64).reshape(B, 1)
        gi = G[t, :, :H]
        gf = G[t, :, H : 2 * H]
        gg = G[t, :, 2 * H : 3 * H]
        go = G[t, :, 3 * H :]
        tanh_c = np.tanh(Cseq[t])
        if t > 0:
            hprev = Hseq[t - 1]
            cprev = Cseq[t - 1]
        else:
            hprev = zero
            cprev = zero
        dc_tot = (dc + dh_t * go * (1.0 - tanh_c * tanh_c)) * m
        do = dh_t * tanh_c * m
        dA = np.empty((B, 4 * H))
        dA[:, :H] = dc_tot * gg * gi * (1.0 - gi)
        dA[:, H : 2 * H] = dc_tot * cprev * gf * (1.0 - gf)
        dA[:, 2 * H : 3 * H] = dc_tot * gi * (1.0 - gg * gg)
        dA[:, 3 * H :] = do * go * (1.0 - go)
        dWx += X[t].T @ dA
        dWh += hprev.T @ dA
        db += np.sum(dA, 0)
        dh = dh_t * (1.0 - m) + dA @ WhT
        dc = dc * (1.0 - m) + dc_tot * gf
    return dWx, dWh, db


def _gru_forward_impl(X, Wx, Wh, b, lengths):
    """One-direction GRU (reset gate applied to h before the matmul)."""
    T, B, _ = X.shape
    H = Wh.shape[0]
    Hseq = np.zeros((T, B, H))
    G = np.zeros((T, B, 3 * H))
    h = np.zeros((B, H))
    Wxzr = np.ascontiguousarray(Wx[:, : 2 * H])
    Wxn = np.ascontiguousarray(Wx[:, 2 * H :])
    Whzr = np.ascontiguousarray(Wh[:, : 2 * H])
    Whn = np.ascontiguousarray(Wh[:, 2 * H :])
    for t in range(T):
        Azr = X[t] @ Wxzr + h @ Whzr + b[: 2 * H]
        gz = 1.0 / (1.0 + np.exp(-Azr[:, :H]))
        gr = 1.0 / (1.0 + np.exp(-Azr[:, H:]))
        gn = np.tanh(X[t] @ Wxn + (gr * h) @ Whn + b[2 * H :])
        h_new = (1.0 - gz) * gn + gz * h
        m = (lengths > t).astype(np.float64).reshape(B, 1)
        h = m * h_new + (1.0 - m) * h
        G[t, :, :H] = gz
        G[t, :, H : 2 * H] = gr
        G[t, :, 2 * H :] = gn
        Hseq[t] = h
    return h, Hseq, G


def _gru_backward_impl(dh_last, X, Wx, Wh, Hseq, G, lengths):
    T, B, _ = X.shape
    H = Wh.shape[0]
    dWx = np.zeros_like(Wx)
    dWh = np.zeros_like(Wh)
    db = np.zeros(3 * H)
    dh = np.zeros((B, H))
    WhzrT = np.ascontiguousarray(Wh[:, : 2 * H].T)
    WhnT = np.ascontiguousarray(Wh[:, 2 * H :].T)
    zero = np.zeros((B, H))
    for t in range(T - 1, -1, -1):
        inject = (lengths - 1 == t).astype(np.float64).reshape(B, 1)
        dh_t = dh + inject * dh_last
        m = (lengths > t).astype(np.float64).reshape(B, 1)
        gz = G[t, :, :H]
        gr = G[t, :, H : 2 * H]
        gn = G[t, :, 2 * H :]
        hprev = Hseq[t - 1] if t > 0 else zero
        dh_new = dh_t * m
        dz = dh_new * (hprev - gn)
        dn = dh_new * (1.0 - gz)
        dh_prev = dh_t * (1.0 - m) + dh_new * gz
        dA_n = dn * (1.0 - gn * gn)
        d_rh = dA_n @ WhnT
        dr = d_rh * hprev
        dh_prev = dh_prev + d_rh * gr
        dA_zr = np.empty((B, 2 * H))
        dA_zr[:, :H] = dz * gz * (1.0 - gz)
        dA_zr[:, H:] = dr * gr * (1.0 - gr)
        dWx[:, : 2 * H] += X[t].T @ dA_zr
        dWx[:, 2 * H :] += X[t].T @ dA_n
        dWh[:, : 2 * H] += hprev.T @ dA_zr
        dWh[:, 2 * H :] += (gr * hprev).T @ dA_n
        db[: 2 * H] += np.sum(dA_zr, 0)
        db[2 * H :] += np.sum(dA_n, 0)
        dh = dh_prev + dA_zr @ WhzrT
    return dWx, dWh, db


_PY_IMPLS = {
    "ngram_hash_counts": _ngram_hash_counts_numpy,
    "lstm_forward": _lstm_forward_impl,
    "lstm_backward": _lstm_backward_impl,
    "gru_forward": _gru_forward_impl,
    "gru_backward": _gru_backward_impl,
}

if _HAVE_NUMBA:
    _NB_IMPLS = {
        "ngram_hash_counts": njit(cache=True)(_ngram_hash_counts_scalar),
        "lstm_forward": njit(cache=True)(_lstm_forward_impl),
        "lstm_backward": njit(cache=True)(_lstm_backward_impl),
        "gru_forward": njit(cache=True)(_gru_forward_impl),
        "gru_backward": njit(cache=True)(_gru_backward_impl),
    }
else:  # pragma: no cover
    _NB_IMPLS = {}


def get_impl(name: str, flavor: str):
    """Fetch one kernel flavor ('numpy' or 'numba') for tests and benchmarks."""
    if flavor == "numpy":
        return _PY_IMPLS[name]
    if flavor == "numba":
        if not _HAVE_NUMBA:
            raise RuntimeError("numba is not available")
        return _NB_IMPLS[name]
    raise ValueError(f"unknown kernel flavor '{flavor}'")


def active_flavor() -> str:
    return "numba" if NUMBA_ENABLED else "numpy"


def _active(name: str):
    return _NB_IMPLS[name] if NUMBA_ENABLED else _PY_IMPLS[name]


ngram_hash_counts = _active("ngram_hash_counts")
lstm_forward = _active("lstm_forward")
lstm_backward = _active("lstm_backward")
gru_forward = _active("gru_forward")
gru_backward = _active("gru_backward")
