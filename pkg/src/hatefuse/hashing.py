"""Canonical JSON and fingerprint helpers.

Every artifact fingerprint in the toolkit is a sha256 over a canonical JSON
rendering, so fingerprints are stable across runs and processes.
"""

from __future__ import annotations

import hashlib
import json


def canonical_json(obj) -> str:
    """Deterministic JSON: sorted keys, compact separators, no ASCII escaping."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def sha256_hex(data: str | bytes) -> str:
    if isinstance(data, str):
        data = data.encode("utf-8")
    return hashlib.sha256(data).hexdigest()


def fingerprint(obj) -> str:
    """sha256 of the canonical JSON rendering of ``obj``."""
    return sha256_hex(canonical_json(obj))


def stable_seed(*parts: int | str) -> list[int]:
    """Entropy list for numpy SeedSequence, derived from mixed int/str parts.

    Strings are hashed so distinct component names get independent streams.
    """
    out: list[int] = []
    for part in parts:
        if isinstance(part, int):
            out.append(part & 0xFFFFFFFF)
        else:
            digest = hashlib.sha256(part.encode("utf-8")).digest()
            out.append(int.from_bytes(digest[:4], "big"))
    return out
