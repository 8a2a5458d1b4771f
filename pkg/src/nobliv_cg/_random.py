"""Deterministic random streams.

Every random draw in the package flows through a :class:`Stream`, a node in a
tree of :class:`numpy.random.SeedSequence` objects keyed by integers.  Solvers
derive one stream per ``(iteration, role)`` and batches are drawn in fixed-size
chunks, each chunk from its own child stream.  The results therefore do not
depend on how many worker threads evaluate the chunks.
"""
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

CHUNK_SIZE = 4096

# roles used as spawn keys
ANCHOR, PATH, EVAL, OUTPUT = 0, 1, 2, 3


class Stream:
    """Handle on a position in the seed tree."""

    __slots__ = ("entropy", "key")

    def __init__(self, entropy, key=()):
        self.entropy = int(entropy)
        self.key = tuple(int(k) for k in key)

    def child(self, *keys):
        return Stream(self.entropy, self.key + keys)

    def generator(self):
        ss = np.random.SeedSequence(self.entropy, spawn_key=self.key)
        return np.random.Generator(np.random.PCG64(ss))

    def chunk(self, i):
        return self.child(i).generator()

    def __repr__(self):
        return f"Stream({self.entropy}, key={self.key})"


def as_stream(rng):
    """Coerce ``None``, an int seed, a Generator or a Stream into a Stream."""
    if isinstance(rng, Stream):
        return rng
    if rng is None:
        return Stream(np.random.SeedSequence().entropy)
    if isinstance(rng, (int, np.integer)):
        return Stream(int(rng))
    if isinstance(rng, np.random.Generator):
        return Stream(int(rng.integers(0, 2**63 - 1)))
    raise TypeError(f"cannot build a random stream from {type(rng).__name__}")


def n_threads():
    try:
        return max(1, int(os.environ.get("NOBLIV_CG_THREADS", "1")))
    except ValueError:
        return 1


def chunk_sizes(m):
    full, rest = divmod(int(m), CHUNK_SIZE)
    return [CHUNK_SIZE] * full + ([rest] if rest else [])


def map_chunks(fn, m, stream):
    """Apply ``fn(size, generator)`` to every chunk of an ``m``-sample batch.

    Results come back in chunk order whatever the thread count.
    """
    sizes = chunk_sizes(m)
    jobs = [(size, stream.chunk(i)) for i, size in enumerate(sizes)]
    threads = min(n_threads(), len(jobs))
    if threads <= 1:
        return [fn(size, gen) for size, gen in jobs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda job: fn(*job), jobs))
