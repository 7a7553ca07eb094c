"""Estimators that connect finite-t ensembles to the limit statements."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy import optimize, stats as sps

from . import measures as ms

__all__ = [
    "EstimatorReport",
    "RunningStats",
    "mc_laplace",
    "hill_estimator",
    "hill_sweep",
    "participation_ratio",
    "log_partition_table",
    "FreezingFit",
    "freezing_curve",
    "kink_fit",
    "freezing_slope_model",
    "estimate_C_gamma",
    "invert_C_direct",
    "default_theta_grid",
    "ks_distance",
    "ks_critical_value",
    "reports_to_json",
    "write_laplace_csv",
]


class EstimationError(ValueError):
    pass


@dataclass
class EstimatorReport:
    name: str
    estimate: float
    stderr: float
    n: int
    method: str

    @property
    def ci95(self):
        return (self.estimate - 1.96 * self.stderr, self.estimate + 1.96 * self.stderr)

    def to_dict(self):
        d = asdict(self)
        d["ci95"] = list(self.ci95)
        return d


def _mean_report(name, x, method):
    x = np.asarray(x, dtype=float)
    if x.size < 2:
        raise EstimationError("need at least two samples")
    return EstimatorReport(name, float(x.mean()), float(x.std(ddof=1) / math.sqrt(x.size)), int(x.size), method)


class RunningStats:
    """Streaming count/mean/M2 with an associative merge (Chan et al. update)."""

    def __init__(self, shape=()):
        self.n = 0
        self.mean = np.zeros(shape)
        self.m2 = np.zeros(shape)

    def push(self, batch):
        batch = np.asarray(batch, dtype=float)
        other = RunningStats(self.mean.shape)
        other.n = batch.shape[0]
        if other.n:
            other.mean = batch.mean(axis=0)
            other.m2 = ((batch - other.mean) ** 2).sum(axis=0)
        self.merge(other)
        return self

    def merge(self, other):
        n = self.n + other.n
        if n == 0:
            return self
        delta = other.mean - self.mean
        self.mean = self.mean + delta * (other.n / n)
        self.m2 = self.m2 + other.m2 + delta**2 * (self.n * other.n / n)
        self.n = n
        return self

    @property
    def variance(self):
        return self.m2 / (self.n - 1)

    @property
    def stderr(self):
        return np.sqrt(self.variance / self.n)


# ---------------------------------------------------------------------------
# Laplace functionals
# ---------------------------------------------------------------------------


def mc_laplace(masses, thetas):
    """Per-theta mean and standard error of exp(-theta * mass)."""
    masses = np.asarray(masses, dtype=float)
    if masses.size == 0:
        raise EstimationError("empty sample")
    out = []
    for th in np.atleast_1d(thetas):
        v = np.exp(-th * masses) if th > 0 else np.ones_like(masses)
        out.append(_mean_report(f"laplace[theta={th:g}]", v, "mc_laplace"))
    return out


def write_laplace_csv(fh, thetas, reports, exact=None, header=None):
    for line in header or ():
        fh.write(f"# {line}\n")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["theta", "estimate", "stderr", "exact"])
    for i, (th, r) in enumerate(zip(thetas, reports)):
        ex = "" if exact is None else repr(float(exact[i]))
        w.writerow([repr(float(th)), repr(r.estimate), repr(r.stderr), ex])


# ---------------------------------------------------------------------------
# tails and weights
# ---------------------------------------------------------------------------


def hill_estimator(sample, k=None):
    """Tail index from the k largest order statistics; k defaults to n^(2/3)."""
    x = np.asarray(sample, dtype=float)
    if np.any(~(x > 0)):
        raise EstimationError("Hill estimator needs positive values")
    n = x.size
    if k is None:
        k = int(n ** (2 / 3))
    if not 1 <= k < n:
        raise EstimationError("need 1 <= k < n")
    top = np.partition(x, n - k - 1)[n - k - 1 :]
    spacing = np.log(top / top.min()).sum()
    if spacing <= 0:
        raise EstimationError("zero spacing")
    a = k / spacing
    return EstimatorReport("hill_alpha", float(a), float(a / math.sqrt(k)), int(n), f"hill[k={k}]")


def hill_sweep(sample, ks=None):
    n = len(sample)
    if ks is None:
        ks = sorted({max(2, int(n**p)) for p in (0.4, 0.5, 0.6, 2 / 3, 0.7, 0.8)})
    return [hill_estimator(sample, k) for k in ks if k < n]


def participation_ratio(weights, q=2.0):
    w = np.asarray(weights, dtype=float)
    if abs(w.sum() - 1.0) > 1e-9:
        raise EstimationError("weights must sum to 1")
    if q <= 1:
        raise EstimationError("q must exceed 1")
    return float(np.sum(w**q))


def ks_distance(a, b):
    a, b = np.asarray(a), np.asarray(b)
    if a.size == 0 or b.size == 0:
        raise EstimationError("empty sample")
    return float(sps.ks_2samp(a, b).statistic)


def ks_critical_value(n, m, level=0.01):
    """Asymptotic two-sample KS critical value c(level) * sqrt((n+m)/(n m))."""
    c = math.sqrt(-0.5 * math.log(level / 2))
    return c * math.sqrt((n + m) / (n * m))


# ---------------------------------------------------------------------------
# freezing of the free energy
# ---------------------------------------------------------------------------


def log_partition_table(path, gammas, times=None):
    """ln Z_t(gamma) per replica: array (replicas, len(gammas), len(times))."""
    times = path.schedule.times if times is None else times
    out = np.empty((path.n_replicas, len(gammas), len(times)))
    for j, t in enumerate(times):
        for i, g in enumerate(gammas):
            out[:, i, j] = ms.log_partition(path, g, t)
    return out


def freezing_slope_model(gammas, d, crit=None):
    """gamma^2/2 below the critical point, crit*gamma - crit^2/2 above it."""
    c = math.sqrt(2 * d) if crit is None else crit
    g = np.asarray(gammas, dtype=float)
    return np.where(g <= c, 0.5 * g**2, c * g - 0.5 * c**2)


@dataclass
class FreezingFit:
    gammas: np.ndarray
    times: np.ndarray
    slopes: list  # EstimatorReport per gamma, corrected fit
    raw_slopes: list  # EstimatorReport per gamma, plain ln Z ~ t fit
    kink: float
    d: int

    def predicted(self):
        return freezing_slope_model(self.gammas, self.d)


def freezing_curve(lnz, gammas, times, d, log_correction=True):
    """Least-squares slopes of ln Z_t(gamma) against t, one report per gamma.

    ``lnz`` has shape (replicas, gammas, times).  Per-replica slopes are fitted
    and averaged, which equals the slope of the mean with a replica-level SE.
    With ``log_correction`` the supercritical fits add (3 gamma / (2 sqrt(2d))) ln t
    to ln Z_t, removing the known logarithmic correction of the maximum.
    """
    times = np.asarray(times, dtype=float)
    if times.size < 2:
        raise EstimationError("need at least two schedule points")
    root = math.sqrt(2 * d)
    tc = times - times.mean()
    denom = float(tc @ tc)
    raw, corr = [], []
    for i, g in enumerate(gammas):
        y = lnz[:, i, :]
        raw.append(_mean_report(f"slope[gamma={g:g}]", y @ tc / denom, "ols"))
        if log_correction and g > root:
            y = y + 1.5 * g / root * np.log(times)
            corr.append(_mean_report(f"slope[gamma={g:g}]", y @ tc / denom, "ols+log"))
        else:
            corr.append(raw[-1])
    gam = np.asarray(gammas, dtype=float)
    kink = kink_fit(gam, np.array([r.estimate for r in corr]), d)
    return FreezingFit(gam, times, corr, raw, kink, d)


def kink_fit(gammas, slopes, d):
    """Critical point minimizing the squared misfit of the freezing model."""
    gammas = np.asarray(gammas, dtype=float)
    if gammas.size < 2:
        return float("nan")

    def loss(c):
        return float(np.sum((slopes - freezing_slope_model(gammas, d, c)) ** 2))

    hi = max(float(gammas.max()), 2 * math.sqrt(2 * d))
    return float(optimize.minimize_scalar(loss, bounds=(1e-3, hi), method="bounded").x)


# ---------------------------------------------------------------------------
# the constant C(gamma)
# ---------------------------------------------------------------------------


def default_theta_grid(n=13):
    return np.logspace(-2, 2, n)


def invert_C_direct(thetas, laplace, mprime_mass, alpha):
    """Least-squares C from -ln L(theta) = C theta^alpha M'(A) (exact on exact data)."""
    x = np.asarray(thetas, dtype=float) ** alpha * mprime_mass
    y = -np.log(np.asarray(laplace, dtype=float))
    return float(x @ y / (x @ x))


def _fit_C(sup, mp, thetas, alpha):
    emp = np.exp(-np.outer(thetas, sup)).mean(axis=1)
    ta = thetas**alpha

    def model(logc):
        return np.exp(-np.outer(ta * math.exp(logc), mp)).mean(axis=1)

    def loss(logc):
        return float(np.sum((emp - model(logc)) ** 2))

    res = optimize.minimize_scalar(loss, bounds=(-12.0, 12.0), method="bounded", options={"xatol": 1e-10})
    h = 1e-3
    curv = (loss(res.x + h) - 2 * loss(res.x) + loss(res.x - h)) / h**2
    return res.x, curv


def estimate_C_gamma(super_totals, mprime_totals, constants, thetas=None, n_boot=50, seed=0):
    """Fit C in E exp(-theta M~) = E exp(-theta^alpha C M') over a theta grid.

    The standard error is a bootstrap over replicas.
    """
    thetas = default_theta_grid() if thetas is None else np.asarray(thetas, dtype=float)
    sup = np.asarray(super_totals, dtype=float)
    mp = np.asarray(mprime_totals, dtype=float)
    if thetas.size < 2:
        raise EstimationError("non-identifiable: theta grid needs at least two points")
    if sup.size < 100 or mp.size < 100:
        raise EstimationError("need at least 100 replicas")
    logc, curv = _fit_C(sup, mp, thetas, constants.alpha)
    if not curv > 1e-10:
        raise EstimationError("non-identifiable: flat objective")
    rng = np.random.default_rng(seed)
    boots = []
    for _ in range(n_boot):
        b, _ = _fit_C(rng.choice(sup, sup.size), rng.choice(mp, mp.size), thetas, constants.alpha)
        boots.append(math.exp(b))
    return EstimatorReport("C_gamma", math.exp(logc), float(np.std(boots, ddof=1)), int(sup.size), "laplace-lsq")


def reports_to_json(reports, header=None):
    body = {"header": header or {}, "reports": [r.to_dict() for r in reports]}
    return json.dumps(body, indent=2, sort_keys=True)
