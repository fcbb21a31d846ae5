"""
Substreams - Deterministic Random Sources
Maps (seed, key...) to an independent numpy Generator so that results do not
depend on worker count or execution order
"""
import hashlib

import numpy as np


def experiment_tag(name: str) -> int:
    """Stable 32-bit tag for an experiment name"""
    digest = hashlib.sha256(name.encode("utf-8")).digest()
    return int.from_bytes(digest[:4], "big")


def substream(seed: int, *key: int) -> np.random.Generator:
    """
    Build the random source for one (seed, key) pair

    Args:
        seed: non-negative run seed
        key: spawn key, e.g. (experiment_tag, block_index)

    Returns:
        np.random.Generator: PCG64 generator private to this key
    """
    sequence = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.default_rng(sequence)
