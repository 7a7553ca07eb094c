"""Replica-block scheduling over an optional process pool.

Every replica owns its RNG streams, so results are identical for any worker
count; blocks are returned in replica order and merged by concatenation.
"""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor

from .fields import _samplers, sample_paths

__all__ = ["WORKERS_ENV", "resolve_workers", "blocks", "map_blocks", "map_paths"]

WORKERS_ENV = "GLASSY_CHAOS_WORKERS"


def resolve_workers(flag=None, configured=1):
    """Command-line flag, then the environment variable, then the config value."""
    if flag is not None:
        n = flag
    elif os.environ.get(WORKERS_ENV):
        n = int(os.environ[WORKERS_ENV])
    else:
        n = configured
    if n < 1:
        raise ValueError("worker count must be at least 1")
    return n


def blocks(n, block):
    return [(s, min(block, n - s)) for s in range(0, n, block)]


def map_blocks(func, n, block, workers=1):
    """[func(start, count) for each replica block], evaluated on ``workers`` processes."""
    parts = blocks(n, block)
    if workers <= 1 or len(parts) <= 1:
        return [func(s, c) for s, c in parts]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(func, *zip(*parts)))


class _PathJob:
    """Picklable block job: sample replicas [start, start+count) and reduce them."""

    def __init__(self, grid, kernel, schedule, seed, reducer):
        self.grid, self.kernel, self.schedule = grid, kernel, schedule
        self.seed, self.reducer = seed, reducer
        self._samplers = None

    def __getstate__(self):
        state = dict(self.__dict__)
        state["_samplers"] = None
        return state

    def __call__(self, start, count):
        if self._samplers is None:
            self._samplers = _samplers(self.grid, self.kernel, self.schedule)
        path = sample_paths(self.grid, self.kernel, self.schedule, count, self.seed, start, self._samplers)
        return self.reducer(path)


def map_paths(grid, kernel, schedule, n, seed, reducer, block=100, workers=1):
    """reducer(FieldPath block) for each block of ``n`` replicas, in replica order."""
    return map_blocks(_PathJob(grid, kernel, schedule, seed, reducer), n, block, workers)
