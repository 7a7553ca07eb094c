"""Binary branching random walk with standard normal steps: a tree-side oracle.

The critical inverse temperature is sqrt(2 ln 2); above it the Gibbs weights
should approach PD(beta_c / beta, 0).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .rng import as_generator, stream

__all__ = [
    "BETA_C",
    "BrwSpec",
    "simulate_leaf_energies",
    "brw_gibbs_weights",
    "cluster_weights",
    "brw_ensemble",
]

BETA_C = math.sqrt(2 * math.log(2))
MAX_DEPTH = 22


@dataclass(frozen=True)
class BrwSpec:
    depth: int
    beta: float = 2 * BETA_C

    def __post_init__(self):
        if not 1 <= self.depth <= MAX_DEPTH:
            raise ValueError(f"depth must lie in [1, {MAX_DEPTH}]")
        if not self.beta > 0:
            raise ValueError("beta must be positive")


def simulate_leaf_energies(spec, rng=None):
    """2^depth leaf values; leaf i's ancestors at level l are i >> (depth - l)."""
    rng = as_generator(rng)
    v = np.zeros(1)
    for _ in range(spec.depth):
        v = np.repeat(v, 2) + rng.standard_normal(2 * v.size)
    return v


def brw_gibbs_weights(energies, beta):
    """e^{beta V_i} / sum_j e^{beta V_j}, in leaf order."""
    e = np.asarray(energies, dtype=float)
    if not np.all(np.isfinite(e)):
        raise ValueError("energies must be finite")
    la = beta * e
    return np.exp(la - logsumexp(la))


def cluster_weights(weights, level):
    """Gibbs mass of each subtree rooted at ``level`` (leaves sharing that ancestor)."""
    w = np.asarray(weights)
    return w.reshape(1 << level, -1).sum(axis=1)


def brw_ensemble(spec, n, seed=0, q=2.0, n_top=8, first=0):
    """Per-replica statistics; replica i draws from stream (seed, depth, first + i).

    Leaves near the maximum come in sibling clusters and the PD(beta_c/beta)
    limit describes whole clusters, so ``participation`` and ``top`` are taken
    over subtrees rooted at half depth (two leaves share a cluster iff their
    overlap is at least 1/2).  ``leaf_participation`` keeps the per-leaf value.
    """
    speed = np.empty(n)
    pr = np.empty(n)
    leaf_pr = np.empty(n)
    top = np.empty((n, n_top))
    level = (spec.depth + 1) // 2
    for i in range(n):
        v = simulate_leaf_energies(spec, stream(seed, spec.depth, first + i))
        leaf = brw_gibbs_weights(v, spec.beta)
        w = cluster_weights(leaf, level)
        speed[i] = v.max() / spec.depth
        pr[i] = np.sum(w**q)
        leaf_pr[i] = np.sum(leaf**q)
        k = min(n_top, w.size)
        t = np.sort(np.partition(w, w.size - k)[w.size - k :])[::-1]
        top[i, :k] = t
        top[i, k:] = 0.0
    return {"speed": speed, "participation": pr, "leaf_participation": leaf_pr, "top": top}
