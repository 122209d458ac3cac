"""Deterministic derivation of independent pseudorandom streams.

Child seeds are SHA-256 digests of the master seed and a label path, so
every (node, trial) stream is reproducible on its own, independent of
evaluation order or thread scheduling.
"""

from __future__ import annotations

import hashlib

SEED_BITS = 64


def split_seed(master: int, *labels) -> int:
    """Child seed for the stream named by ``labels`` under ``master``.

    The labels form a path ("node", 3, "trial", 17, ...); distinct paths
    give statistically independent 64-bit seeds, and the same path always
    gives the same seed.
    """
    h = hashlib.sha256()
    h.update(str(int(master)).encode())
    for label in labels:
        h.update(b"/")
        h.update(str(label).encode())
    return int.from_bytes(h.digest()[: SEED_BITS // 8], "big")
