"""Deterministic RNG substreams for reproducible, parallelizable experiments.

Every Monte Carlo loop in the package draws from ``substream(seed, *key)``
where the key encodes (experiment stage, grid row, chunk index, ...).  The
mapping is a pure function of its arguments, so results are bit-identical
no matter how chunks are scheduled across threads.
"""

from concurrent.futures import ThreadPoolExecutor

import numpy as np


def substream(seed, *key):
    """Return a fresh Generator for the given master seed and integer key path."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(key)))


def derive_seeds(seed, count):
    """Deterministically expand one master seed into ``count`` child seeds."""
    state = np.random.SeedSequence(seed).generate_state(count, dtype=np.uint64)
    return [int(s) for s in state]


def map_chunks(fn, n_chunks, threads=1):
    """Evaluate ``fn(chunk_index)`` for every chunk, in index order.

    With ``threads > 1`` chunks run on a thread pool; the returned list is
    always ordered by chunk index, so downstream reductions are independent
    of the schedule.
    """
    if n_chunks <= 0:
        return []
    if threads is None or threads <= 1 or n_chunks == 1:
        return [fn(i) for i in range(n_chunks)]
    with ThreadPoolExecutor(max_workers=min(threads, n_chunks)) as pool:
        return list(pool.map(fn, range(n_chunks)))


def chunk_sizes(total, chunk):
    """Split ``total`` items into fixed-size chunks (last one ragged)."""
    if total <= 0:
        return []
    n_full, rem = divmod(total, chunk)
    sizes = [chunk] * n_full
    if rem:
        sizes.append(rem)
    return sizes
