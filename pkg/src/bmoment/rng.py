"""Counter-based random streams.

Samples are grouped into fixed blocks of ``BLOCK_SIZE`` consecutive indices.
Block ``b`` under seed ``s`` draws from a Philox generator keyed by
``(s, b)``, so sample ``i`` always comes from row ``i % BLOCK_SIZE`` of block
``i // BLOCK_SIZE`` no matter how blocks are spread over workers.
"""

from __future__ import annotations

import os

import numpy as np

__all__ = ["BLOCK_SIZE", "SEED_ENV", "DEFAULT_SEED", "default_seed", "block_generator", "blocks"]

BLOCK_SIZE = 1024
SEED_ENV = "BMOMENT_SEED"
DEFAULT_SEED = 20240601

_MASK64 = (1 << 64) - 1


def default_seed() -> int:
    """Seed from ``$BMOMENT_SEED`` if set, else :data:`DEFAULT_SEED`."""
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw.strip() == "":
        return DEFAULT_SEED
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def block_generator(seed: int, block: int, stream: int = 0) -> np.random.Generator:
    """Generator for one block; ``stream`` separates independent uses of the same seed."""
    if block < 0 or stream < 0:
        raise ValueError("block and stream must be non-negative")
    key = (int(seed) & _MASK64) | ((int(block) & 0xFFFFFFFFFFFF) << 64) | ((int(stream) & 0xFFFF) << 112)
    return np.random.Generator(np.random.Philox(key=key))


def blocks(n_samples: int) -> list[tuple[int, int]]:
    """``(block_index, count)`` pairs covering ``n_samples`` samples."""
    out = []
    start = 0
    b = 0
    while start < n_samples:
        count = min(BLOCK_SIZE, n_samples - start)
        out.append((b, count))
        start += count
        b += 1
    return out
