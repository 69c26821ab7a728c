"""Stable seed derivation for independent deterministic RNG streams.

Every random decision in a simulation pipeline (topology retries, per-node
streams, failure draws, query sampling, per-trial experiment seeds) gets its
own child seed derived from a master seed plus a label path.  Derivation is a
SHA-256 hash, so it is stable across Python versions and platforms, and
adding new labels never perturbs existing streams.
"""

import hashlib
import random

__all__ = ["derive_seed", "sensed_payload"]

_SEP = b"\x1f"


def derive_seed(*parts: int | str) -> int:
    """Derive a 64-bit child seed from a master seed and label parts."""
    raw = _SEP.join(str(p).encode("utf-8") for p in parts)
    digest = hashlib.sha256(raw).digest()
    return int.from_bytes(digest[:8], "big")


def sensed_payload(seed: int, node_id: int, length: int = 16) -> bytes:
    """Deterministic per-node sensor reading, independent of read order."""
    if length < 1:
        raise ValueError(f"payload length must be >= 1, got {length}")
    rng = random.Random(derive_seed(seed, "sense", node_id))
    return rng.randbytes(length)
