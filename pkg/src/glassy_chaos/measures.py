"""Chaos measures of a sampled field path and the diagnostics built on them.

Masses are kept in log space (``log_abs`` plus ``sign``) because gamma*X_t
reaches several hundred at large t; totals use a max-shifted sum.  Integrals
over the box are midpoint sums over grid cells.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from . import kernels as kn

__all__ = [
    "MeasureGrid",
    "subcritical_measure",
    "derivative_measure",
    "seneta_heyde_measure",
    "supercritical_measure",
    "free_energy",
    "log_partition",
    "gibbs_weights",
    "top_weights",
    "barrier_diagnostic",
    "indicator_box",
    "smooth_bump",
    "summary_rows",
    "SUMMARY_FIELDS",
]

MODES = ("subcritical", "critical_derivative", "critical_seneta_heyde", "supercritical_renorm")


@dataclass
class MeasureGrid:
    """Cell masses of one chaos measure; arrays are (replicas, *grid.shape)."""

    mode: str
    t: float
    log_abs: np.ndarray
    sign: np.ndarray
    cell_volume: float
    gamma: float | None = None
    grid: object = None

    @property
    def masses(self):
        with np.errstate(over="ignore"):
            return self.sign * np.exp(self.log_abs)

    def _flat(self):
        R = self.log_abs.shape[0]
        return self.log_abs.reshape(R, -1), self.sign.reshape(R, -1)

    def log_total(self):
        """log|total| and sign of the total, per replica."""
        la, sg = self._flat()
        return logsumexp(la, axis=1, b=sg, return_sign=True)

    def total(self):
        lt, s = self.log_total()
        with np.errstate(over="ignore"):
            return s * np.exp(lt)

    def integrate(self, f):
        """Sum of f(x_i) * mass_i with f evaluated at cell centers."""
        w = np.asarray(f(self.grid.points()), dtype=float)
        la, sg = self._flat()
        wf = w.reshape(-1)
        pos = wf > 0
        lt, s = logsumexp(la[:, pos] + np.log(wf[pos]), axis=1, b=sg[:, pos], return_sign=True)
        return s * np.exp(lt)


def _root(path):
    return math.sqrt(2 * path.grid.d)


def _grid_measure(path, mode, t, log_abs, sign, gamma=None):
    return MeasureGrid(mode, float(t), log_abs, sign, path.grid.cell_volume, gamma, path.grid)


def subcritical_measure(path, gamma, t):
    """M_t^gamma: cell mass exp(gamma X_t - gamma^2 E[X_t^2]/2) * vol."""
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    X = path.at(t)
    v = path.variance(t)
    la = gamma * X - 0.5 * gamma**2 * v + math.log(path.grid.cell_volume)
    return _grid_measure(path, "subcritical", t, la, np.ones_like(la), gamma)


def derivative_measure(path, t):
    """M'_t: cell mass (sqrt(2d) v - X) exp(sqrt(2d) X - d v) * vol, v = E[X_t^2]."""
    X = path.at(t)
    v = path.variance(t)
    root, d = _root(path), path.grid.d
    pre = root * v - X
    with np.errstate(divide="ignore"):
        la = np.log(np.abs(pre)) + root * X - d * v + math.log(path.grid.cell_volume)
    return _grid_measure(path, "critical_derivative", t, la, np.sign(pre))


def seneta_heyde_measure(path, t):
    """sqrt(t) M_t^{sqrt(2d)}."""
    if t <= 0:
        raise ValueError("Seneta-Heyde norming needs t > 0")
    X = path.at(t)
    v = path.variance(t)
    root, d = _root(path), path.grid.d
    la = 0.5 * math.log(t) + root * X - d * v + math.log(path.grid.cell_volume)
    return _grid_measure(path, "critical_seneta_heyde", t, la, np.ones_like(la))


def supercritical_measure(path, gamma, t, constants):
    """t^{3 gamma/(2 sqrt(2d))} exp(t (gamma/sqrt2 - sqrt d)^2) M_t^gamma."""
    if constants.d != path.grid.d or abs(constants.gamma - gamma) > 1e-12:
        raise ValueError("renormalization constants were built for a different (d, gamma)")
    if t <= 0:
        raise ValueError("supercritical renormalization needs t > 0")
    sub = subcritical_measure(path, gamma, t)
    shift = constants.super_poly_exponent * math.log(t) + constants.super_exp_rate * t
    return _grid_measure(path, "supercritical_renorm", t, sub.log_abs + shift, sub.sign, gamma)


def log_partition(path, gamma, t):
    """ln sum_cells exp(gamma X_t(x)) vol, per replica."""
    X = path.at(t)
    R = X.shape[0]
    return logsumexp(gamma * X.reshape(R, -1), axis=1) + math.log(path.grid.cell_volume)


def free_energy(path, gamma, t):
    """(1/t) ln sum_cells exp(gamma X_t(x)) vol, per replica."""
    if t <= 0:
        raise ValueError("free energy needs t > 0")
    return log_partition(path, gamma, t) / t


def gibbs_weights(measure):
    """Normalized cell weights sorted decreasing, shape (replicas, cells)."""
    la, sg = measure._flat()
    if np.any(sg < 0):
        raise ValueError("Gibbs weights need a nonnegative measure")
    lt = logsumexp(la, axis=1, keepdims=True)
    if np.any(~np.isfinite(lt)):
        raise ValueError("zero total mass")
    w = np.exp(la - lt)
    return -np.sort(-w, axis=1)


def top_weights(measure, k=1):
    """Share of the total carried by the k heaviest cells, per replica."""
    la, sg = measure._flat()
    lt = logsumexp(la, axis=1, b=sg)
    k = min(k, la.shape[1])
    top = -np.partition(-la, k - 1, axis=1)[:, :k]
    return np.exp(logsumexp(top, axis=1) - lt)


def barrier_diagnostic(path, t):
    """Fraction of grid points outside -10 sqrt(2d) t <= Y_t <= -kappa_d ln t, per replica."""
    if t < 2:
        raise ValueError("barrier diagnostic needs t >= 2")
    root = _root(path)
    kappa = 1 / (8 * root)
    Y = path.at(t) - root * t
    bad = (Y > -kappa * math.log(t)) | (Y < -10 * root * t)
    R = Y.shape[0]
    return bad.reshape(R, -1).mean(axis=1)


# ---------------------------------------------------------------------------
# test functions for Laplace functionals
# ---------------------------------------------------------------------------


def indicator_box(lo, hi):
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)

    def f(x):
        return np.all((x >= lo) & (x < hi), axis=-1).astype(float)

    return f


def smooth_bump(center, radius):
    center = np.asarray(center, dtype=float)

    def f(x):
        s2 = np.sum((x - center) ** 2, axis=-1) / radius**2
        out = np.zeros(s2.shape)
        inside = s2 < 1
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - s2[inside]))
        return out

    return f


# ---------------------------------------------------------------------------
# per-replica summaries
# ---------------------------------------------------------------------------

SUMMARY_FIELDS = ("replica", "t", "gamma", "mode", "total_mass", "top1_weight", "top8_weight", "free_energy")


def summary_rows(path, gammas, times=None):
    """Rows of SUMMARY_FIELDS for every replica, schedule time and gamma."""
    d = path.grid.d
    times = path.schedule.times if times is None else times
    rows = []
    for t in times:
        if t <= 0:
            continue
        measures = []
        for g in gammas:
            if g * g > 2 * d:
                m = supercritical_measure(path, g, t, kn.make_renorm_constants(d, g))
            else:
                m = subcritical_measure(path, g, t)
            measures.append((g, m, free_energy(path, g, t)))
        measures.append((math.sqrt(2 * d), derivative_measure(path, t), None))
        measures.append((math.sqrt(2 * d), seneta_heyde_measure(path, t), None))
        for g, m, fe in measures:
            tot = m.total()
            positive = m.mode != "critical_derivative"
            t1 = top_weights(m, 1) if positive else np.full(tot.shape, np.nan)
            t8 = top_weights(m, 8) if positive else np.full(tot.shape, np.nan)
            for i, r in enumerate(path.streams):
                rows.append((int(r), t, g, m.mode, float(tot[i]), float(t1[i]), float(t8[i]),
                             float(fe[i]) if fe is not None else float("nan")))
    return rows
