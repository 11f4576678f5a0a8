"""Deterministic labeled random streams.

One master seed drives every stochastic element of a run. Independent
draws are derived by hashing (seed, label), so unrelated parts of a
scenario never share or shift each other's randomness: adding a green
antenna must not perturb mobile drops or the shadowing of existing links.
"""

from __future__ import annotations

import hashlib

import numpy as np

_U64 = (1 << 64) - 1


def derive_seed(seed: int, label: str) -> int:
    """64-bit sub-seed for (seed, label), stable across runs and platforms."""
    payload = f"{seed & _U64}:{label}".encode()
    return int.from_bytes(hashlib.blake2b(payload, digest_size=8).digest(), "little")


def substream(seed: int, label: str) -> np.random.Generator:
    """Independent generator for a named purpose (e.g. "drops")."""
    return np.random.Generator(np.random.PCG64(derive_seed(seed, label)))

def label_normal(seed: int, label: str) -> float:
    """Standard-normal draw fully determined by (seed, label).

    Box-Muller over two 64-bit lanes of the label hash; carries no
    generator state, so every labeled draw is independent of all others.
    """
    payload = f"{seed & _U64}:{label}".encode()
    digest = hashlib.blake2b(payload, digest_size=16).digest()
    a = int.from_bytes(digest[:8], "little")
    b = int.from_bytes(digest[8:], "little")
    u1 = (a + 1) / (_U64 + 2)    # in (0, 1), log-safe
    u2 = (b + 0.5) / (_U64 + 1)
    return float(np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2))
