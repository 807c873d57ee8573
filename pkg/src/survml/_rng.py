"""Labelled random substreams derived from a single integer seed."""

import hashlib

import numpy as np


def _label_words(label):
    digest = hashlib.sha256(str(label).encode("utf-8")).digest()
    return [int.from_bytes(digest[i:i + 4], "little") for i in range(0, 16, 4)]


def substream(seed, *labels):
    """Return a generator for the stream named by ``labels`` under ``seed``.

    Two calls with the same seed and labels yield identical streams; any
    change in a label yields an independent one.
    """
    if isinstance(seed, np.random.Generator):
        return seed
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF]
    for label in labels:
        entropy.extend(_label_words(label))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))
