"""The atomic stable limit S_gamma and the Poisson-Dirichlet weights it induces.

S_gamma = c * sum_i z_i delta_{x_i}, where (x_i, z_i) is Poisson with intensity
M'(dx) x z^{-1-alpha} dz.  Atoms below ``z_min`` are replaced by their mean
mass, which is finite because alpha < 1.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from . import kernels as kn
from .rng import as_generator, stream

__all__ = [
    "IntensityMeasure",
    "AtomicMeasure",
    "sample_stable_measure",
    "sample_stable_totals",
    "laplace_exact",
    "small_mass_aggregate",
    "truncation_bias_ratio",
    "pd_weights_from_poisson",
    "pd_weights_stick_breaking",
    "pd_sample",
    "pd_ensemble",
    "write_atoms_csv",
    "atom_summary",
]

DEFAULT_Z_MIN = 1e-6
TRUNCATION_BIAS_LIMIT = 1e-3
TOTALS_BLOCK = 1000  # replicas per RNG stream in sample_stable_totals


@dataclass
class IntensityMeasure:
    """Spatial intensity of the Poisson atoms.

    Deterministic: uniform density of total ``mass`` on the box [lo, hi).
    Grid-backed: cell weights ``cell_mass`` (flattened) over ``grid``.
    """

    mass: float
    lo: np.ndarray
    hi: np.ndarray
    cell_mass: np.ndarray | None = None
    grid: object = None
    clipped_mass: float = 0.0

    def __post_init__(self):
        if not self.mass > 0:
            raise ValueError("intensity total mass must be positive")

    @property
    def d(self):
        return len(self.lo)

    @classmethod
    def deterministic(cls, mass, d=1, lo=None, hi=None):
        lo = np.zeros(d) if lo is None else np.asarray(lo, dtype=float)
        hi = np.ones(d) if hi is None else np.asarray(hi, dtype=float)
        return cls(float(mass), lo, hi)

    @classmethod
    def from_measure(cls, measure, replica=0):
        """Use one replica of a MeasureGrid as M'.  Negative cells are dropped."""
        m = measure.masses[replica].reshape(-1)
        neg = float(-m[m < 0].sum())
        m = np.where(m > 0, m, 0.0)
        g = measure.grid
        lo = np.asarray(g.origin, dtype=float)
        return cls(float(m.sum()), lo, lo + g.side, m, g, neg)

    def restrict(self, lo, hi):
        """Deterministic intensity on a sub-box, with proportional mass."""
        if self.cell_mass is not None:
            raise NotImplementedError("restriction is only defined for deterministic intensities")
        lo, hi = np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)
        frac = np.prod((hi - lo) / (self.hi - self.lo))
        return IntensityMeasure(self.mass * frac, lo, hi)

    def sample_locations(self, n, rng):
        if self.cell_mass is None:
            return self.lo + (self.hi - self.lo) * rng.random((n, self.d))
        g = self.grid
        cells = rng.choice(self.cell_mass.size, size=n, p=self.cell_mass / self.mass)
        idx = np.stack(np.unravel_index(cells, g.shape), axis=-1)
        return self.lo + (idx + rng.random((n, self.d))) * g.h


@dataclass
class AtomicMeasure:
    locations: np.ndarray  # (n, d)
    masses: np.ndarray  # already scaled by c
    z_min: float
    aggregate: float  # mean mass carried by atoms below z_min, scaled by c

    @property
    def retained(self):
        return float(self.masses.sum())

    def total(self):
        return self.retained + self.aggregate

    def mass_in(self, lo, hi, aggregate_share=0.0):
        inside = np.all((self.locations >= lo) & (self.locations < hi), axis=1)
        return float(self.masses[inside].sum()) + aggregate_share * self.aggregate


def small_mass_aggregate(mu, alpha, z_min, c=1.0):
    """c * mu * int_0^{z_min} z * z^{-1-alpha} dz."""
    return c * mu * z_min ** (1 - alpha) / (1 - alpha)


def truncation_bias_ratio(mu, constants, C, z_min=DEFAULT_Z_MIN):
    """Aggregate small mass relative to the stable scale (C mu)^{1/alpha} of S(A).

    The mean of S(A) is infinite, so the scale parameter stands in for the
    typical retained mass.
    """
    c = kn.stable_scale_constant(C, constants)
    return small_mass_aggregate(mu, constants.alpha, z_min, c) / (C * mu) ** (1 / constants.alpha)


def _check_z_min(z_min):
    if not z_min > 0:
        raise ValueError("z_min must be positive")


def sample_stable_measure(intensity, constants, C, z_min=DEFAULT_Z_MIN, rng=None):
    """One realization of S_gamma with atoms above z_min (masses include the factor c)."""
    _check_z_min(z_min)
    rng = as_generator(rng)
    a = constants.alpha
    c = kn.stable_scale_constant(C, constants)
    n = rng.poisson(intensity.mass * z_min ** (-a) / a)
    z = z_min * rng.random(n) ** (-1 / a)
    loc = intensity.sample_locations(n, rng)
    return AtomicMeasure(loc, c * z, z_min, small_mass_aggregate(intensity.mass, a, z_min, c))


def sample_stable_totals(mu, constants, C, n, z_min=DEFAULT_Z_MIN, seed=0, with_aggregate=True):
    """Total masses S(A) for ``n`` independent replicas with deterministic M'(A) = mu.

    Replicas are produced in blocks of TOTALS_BLOCK, block b drawing from
    stream (seed, b), so the result does not depend on how work is split.
    """
    _check_z_min(z_min)
    a = constants.alpha
    c = kn.stable_scale_constant(C, constants)
    lam = mu * z_min ** (-a) / a
    agg = small_mass_aggregate(mu, a, z_min, c) if with_aggregate else 0.0
    out = np.empty(n)
    for b, start in enumerate(range(0, n, TOTALS_BLOCK)):
        rng = stream(seed, b)
        m = min(TOTALS_BLOCK, n - start)
        counts = rng.poisson(lam, m)
        # sub-blocks keep the uniform buffer near 1e7 draws
        step = max(1, int(1e7 // max(lam, 1.0)))
        for s in range(0, m, step):
            cnt = counts[s : s + step]
            z = z_min * rng.random(int(cnt.sum())) ** (-1 / a)
            owner = np.repeat(np.arange(cnt.size), cnt)
            out[start + s : start + s + cnt.size] = np.bincount(owner, weights=z, minlength=cnt.size)
    return c * out + agg


def laplace_exact(theta, C, constants, mprime_mass):
    """E exp(-theta S(A)) given M'(A) = mprime_mass: exp(-C theta^alpha M'(A))."""
    theta = np.asarray(theta, dtype=float)
    if np.any(theta < 0):
        raise ValueError("theta must be nonnegative")
    return np.exp(-C * theta**constants.alpha * mprime_mass)


# ---------------------------------------------------------------------------
# Poisson-Dirichlet PD(alpha, 0)
# ---------------------------------------------------------------------------

_PD_DUST = 1e-4
_PD_BLOCK = 4096
_PD_MAX_ATOMS = 1 << 16


def _check_alpha(alpha):
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")


def _poisson_atoms(alpha, rng):
    """Decreasing atoms z_i = (alpha Gamma_i)^{-1/alpha} and the mean mass left below the last."""
    gam = 0.0
    parts = []
    total = 0.0
    count = 0
    while True:
        g = gam + np.cumsum(rng.exponential(size=_PD_BLOCK))
        gam = g[-1]
        z = (alpha * g) ** (-1 / alpha)
        parts.append(z)
        total += z.sum()
        count += _PD_BLOCK
        dust = z[-1] ** (1 - alpha) / (1 - alpha)
        if dust <= _PD_DUST * total or count >= _PD_MAX_ATOMS:
            return np.concatenate(parts), total + dust


def _stick_pieces(alpha, rng):
    """Stick-breaking pieces in size-biased order, until the rest is below 1e-4 (or the cap)."""
    parts = []
    rest = 1.0
    i0 = 1
    while rest > _PD_DUST and i0 < _PD_MAX_ATOMS:
        i = np.arange(i0, i0 + _PD_BLOCK)
        v = rng.beta(1 - alpha, i * alpha)
        keep = rest * np.concatenate(([1.0], np.cumprod(1 - v)[:-1]))
        parts.append(keep * v)
        rest = keep[-1] * (1 - v[-1])
        i0 += _PD_BLOCK
    return np.concatenate(parts)


def _top(w, n_top):
    if n_top >= w.size:
        return np.sort(w)[::-1]
    return np.sort(np.partition(w, w.size - n_top)[w.size - n_top :])[::-1]


def pd_weights_from_poisson(alpha, n_top, rng=None):
    """Ranked normalized masses of a Poisson process with intensity z^{-1-alpha} dz.

    Atoms are generated in decreasing order until the mean mass below the
    current atom is at most 1e-4 of the running sum, or 2^16 atoms.  That mean
    mass joins the normaliser; its fluctuation is of order z^{1 - alpha/2},
    far below the retained weights.
    """
    _check_alpha(alpha)
    z, total = _poisson_atoms(alpha, as_generator(rng))
    return z[:n_top] / total


def pd_weights_stick_breaking(alpha, n_top, rng=None):
    """Ranked PD(alpha, 0) weights from V_i ~ Beta(1 - alpha, i alpha) stick breaking."""
    _check_alpha(alpha)
    return _top(_stick_pieces(alpha, as_generator(rng)), n_top)


def pd_ensemble(alpha, n_top, n, seed=0, method="poisson", first=0):
    """Ranked top weights (n, n_top) and sum of squared weights (n,) over all atoms.

    Replica i draws from stream (seed, first + i).
    """
    _check_alpha(alpha)
    top = np.zeros((n, n_top))
    pr = np.empty(n)
    for i in range(n):
        rng = stream(seed, first + i)
        if method == "poisson":
            z, total = _poisson_atoms(alpha, rng)
            w = z / total
            top[i, : min(n_top, w.size)] = w[:n_top]
        elif method == "stick":
            w = _stick_pieces(alpha, rng)
            t = _top(w, n_top)
            top[i, : t.size] = t
        else:
            raise ValueError(f"unknown PD method {method!r}")
        pr[i] = np.sum(w**2)
    return top, pr


def pd_sample(alpha, n_top, n, seed=0, method="poisson"):
    """(n, n_top) array of ranked weights; replica i uses stream (seed, i)."""
    return pd_ensemble(alpha, n_top, n, seed, method)[0]


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------


def write_atoms_csv(measure, fh, header=None):
    """CSV with columns x[, y], z; ``header`` lines are written as # comments."""
    for line in header or ():
        fh.write(f"# {line}\n")
    d = measure.locations.shape[1]
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["x", "y"][:d] + ["z"])
    for loc, z in zip(measure.locations, measure.masses):
        w.writerow([repr(float(v)) for v in loc] + [repr(float(z))])


def atom_summary(measure):
    return {
        "atom_count": int(measure.masses.size),
        "retained_mass": measure.retained,
        "aggregate_small_mass": measure.aggregate,
        "z_min": measure.z_min,
    }
