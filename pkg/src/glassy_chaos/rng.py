"""Counter-based random streams.

Every draw in the package comes from a Philox generator keyed by
``(seed, *key)``, typically ``(seed, replica_id, increment_index)``.  Streams
are therefore independent by construction and a replica's values do not depend
on which worker produced it or in what order.
"""
import numpy as np

__all__ = ["stream", "as_generator"]


def stream(seed, *key):
    """Generator for the stream identified by ``key`` under ``seed``.

    ``seed`` may itself be a tuple ``(seed, *prefix)``; the prefix is prepended
    to ``key``, which lets callers hand a sub-namespace to library functions.
    """
    if isinstance(seed, tuple):
        seed, key = seed[0], tuple(seed[1:]) + key
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def as_generator(rng):
    """Accept a Generator, an int seed or None."""
    if isinstance(rng, np.random.Generator):
        return rng
    return stream(0 if rng is None else rng)
