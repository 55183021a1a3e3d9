"""
Counter-based random substreams.

Every random draw in matrixrl comes from a generator obtained by
``substream(seed, purpose, *indices)``. The root ``seed`` is the entropy of a
``numpy.random.SeedSequence`` whose spawn key is the label tuple: string labels
are hashed to 32-bit integers with BLAKE2b, integer labels are used as they are.
Two calls with equal labels yield bitwise-identical streams; any label change
yields an independent stream.
"""
from typing import *
import hashlib
import numpy as np


def _label_key(label: Union[str, int]) -> int:
    if isinstance(label, (int, np.integer)):
        if label < 0:
            raise ValueError(f"Invalid substream label '{label}', must be nonnegative")
        return int(label)
    digest = hashlib.blake2b(str(label).encode('utf-8'), digest_size=4).digest()
    return int.from_bytes(digest, 'little')


def spawn_seed(seed: int, *labels: Union[str, int]) -> np.random.SeedSequence:
    """
    Build the SeedSequence for a labelled substream.
    """
    return np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(_label_key(l) for l in labels))


def substream(seed: int, *labels: Union[str, int]) -> np.random.Generator:
    """
    Generator for the substream ``(seed, *labels)``.

    Args:
        seed: Root seed of the experiment.
        labels: Purpose string followed by task/episode/attempt indices.

    Returns:
        A fresh ``numpy.random.Generator`` (PCG64).
    """
    return np.random.default_rng(spawn_seed(seed, *labels))
