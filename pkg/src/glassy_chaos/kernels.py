"""Covariance kernels, cut-off families and renormalization constants.

Three families of log-correlated cut-off fields are supported:

* star-scale-invariant kernels ``K_t(x) = int_1^{e^t} k(xu)/u du`` built from a
  compactly supported correlation ``k`` (:class:`StarKernelSpec`);
* the massive free field cut-off ``G_{m,t}`` built from
  ``k_m(r) = 1/2 int_0^inf exp(-m^2 r^2/(2v) - v/2) dv`` (:class:`MffSpec`);
* the Dirichlet GFF on an axis-aligned rectangle, cut off in heat-kernel
  time (:class:`GffDomainSpec`).

Scalar evaluators use adaptive Gauss-Kronrod quadrature (``scipy.integrate.quad``)
after the log substitution ``u = e^s`` which turns ``K_t`` into
``int_0^t k(x e^s) ds``.  The ``*_table`` helpers are vectorized fixed-order
Gauss-Legendre versions of the same integrals used by the field samplers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy import integrate, special
from scipy.interpolate import CubicSpline

__all__ = [
    "QuadratureError",
    "KernelError",
    "StarKernelSpec",
    "MffSpec",
    "GffDomainSpec",
    "RenormConstants",
    "triangle1d",
    "wendland2",
    "mff_localized",
    "eval_star_kernel",
    "eval_cutoff_cov",
    "eval_increment_cov",
    "cutoff_cov_table",
    "eval_mff_kernel",
    "mff_kernel_closed_form",
    "eval_mff_cutoff_cov",
    "mff_cutoff_cov_closed_form",
    "mff_sandwich_gap",
    "mff_sandwich_split_bound",
    "eval_gff_cutoff_cov",
    "gff_variance",
    "gff_truncation_bound",
    "gff_required_modes",
    "generalized_radius",
    "discrete_spectrum_min",
    "empirical_lipschitz",
    "make_renorm_constants",
    "stable_scale_constant",
    "scale_constant_inverse",
]

QUAD_TOL = 1e-10
GFF_TOL = 1e-8


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance."""

    def __init__(self, message, residual):
        super().__init__(f"{message} (achieved residual {residual:.3e})")
        self.residual = residual


class KernelError(ValueError):
    pass


# ---------------------------------------------------------------------------
# smooth bump autocorrelation used to localize k_m
# ---------------------------------------------------------------------------

_BUMP_RADIUS = 1.0  # standard mollifier on the unit disk; phi lives on |x| <= 2


@lru_cache(maxsize=None)
def _bump_autocorrelation() -> CubicSpline:
    """Radial profile of phi(x) = int rho(y) rho(y + x) dy, normalized to phi(0)=1.

    rho(y) = exp(-1 / (1 - (|y|/a)^2)) on the disk of radius a.  The 2D
    autocorrelation is computed with an FFT on a uniform grid; for a C-infinity
    compactly supported integrand the trapezoidal rule this amounts to is
    spectrally accurate.
    """
    a = _BUMP_RADIUS
    n = 1024
    h = 4 * a / n  # grid covers [-2a, 2a)^2, enough to avoid wrap-around
    ax = (np.arange(n) - n // 2) * h
    xx, yy = np.meshgrid(ax, ax, indexing="ij")
    s2 = (xx**2 + yy**2) / a**2
    rho = np.zeros_like(s2)
    inside = s2 < 1.0
    rho[inside] = np.exp(-1.0 / (1.0 - s2[inside]))
    f = np.fft.rfft2(rho)
    auto = np.fft.irfft2(f * np.conj(f), s=rho.shape)
    profile = auto[0, : n // 2 + 1]
    profile = profile / profile[0]
    r = np.arange(profile.size) * h
    profile = np.where(r >= 2 * a, 0.0, np.clip(profile, 0.0, 1.0))
    return CubicSpline(r, profile, bc_type=((1, 0.0), (1, 0.0)))


def bump_phi(r):
    """phi(|x|) with phi(0) = 1, supported on |x| <= 2."""
    r = np.abs(np.asarray(r, dtype=float))
    spline = _bump_autocorrelation()
    out = np.where(r < 2 * _BUMP_RADIUS, spline(np.minimum(r, 2 * _BUMP_RADIUS)), 0.0)
    return np.clip(out, 0.0, 1.0)


# ---------------------------------------------------------------------------
# kernel specs
# ---------------------------------------------------------------------------


def mff_kernel_closed_form(r, m=1.0):
    """k_m(r) = m r K_1(m r), with k_m(0) = 1."""
    z = m * np.abs(np.asarray(r, dtype=float))
    with np.errstate(invalid="ignore", over="ignore"):
        out = z * special.k1(np.where(z > 0, z, 1.0))
    return np.where(z > 0, out, 1.0)


@dataclass(frozen=True)
class StarKernelSpec:
    """A compactly supported radial correlation kernel k with k(0) = 1.

    ``family`` is one of ``"triangle1d"``, ``"wendland2"``, ``"mff-localized"``
    or ``"custom"``.  Custom kernels carry their profile in ``profile`` and
    are subject to :meth:`validate`.
    """

    family: str
    d: int
    support_radius: float = 1.0
    m: float = 1.0
    epsilon: float = 1.0
    profile: Callable | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.d not in (1, 2):
            raise KernelError("dimension must be 1 or 2")
        if self.support_radius <= 0:
            raise KernelError("support_radius must be positive")
        if self.family == "triangle1d" and self.d != 1:
            raise KernelError("triangle1d is positive definite only in d=1")
        if self.family == "mff-localized" and self.epsilon <= 0:
            raise KernelError("epsilon must be positive")
        if self.family == "custom" and self.profile is None:
            raise KernelError("custom kernel needs a profile")
        if self.family not in ("triangle1d", "wendland2", "mff-localized", "custom"):
            raise KernelError(f"unknown star kernel family {self.family!r}")

    @property
    def stationary(self):
        return True

    def radial(self, r):
        """Vectorized k as a function of |x|."""
        r = np.abs(np.asarray(r, dtype=float))
        R = self.support_radius
        if self.family == "triangle1d":
            return np.clip(1.0 - r / R, 0.0, None)
        if self.family == "wendland2":
            s = np.clip(r / R, 0.0, 1.0)
            return (1.0 - s) ** 4 * (4.0 * s + 1.0)
        if self.family == "mff-localized":
            return mff_kernel_closed_form(r, self.m) * bump_phi(self.epsilon * r)
        out = np.asarray(self.profile(r), dtype=float)
        return np.where(r >= R, 0.0, out)

    def validate(self, n=512, tol=1e-9):
        """Check normalization, nonnegativity and the discrete-spectrum PSD witness."""
        if abs(float(self.radial(0.0)) - 1.0) > 1e-12:
            raise KernelError("kernel is not normalized: k(0) != 1")
        r = np.linspace(0, self.support_radius, 257)
        if np.any(self.radial(r) < -1e-15):
            raise KernelError("kernel takes negative values")
        lam = discrete_spectrum_min(self, n=n)
        if lam < -tol:
            raise KernelError(f"kernel is not positive definite: discrete spectrum reaches {lam:.3e}")
        return self


def triangle1d(support_radius=1.0):
    return StarKernelSpec("triangle1d", 1, support_radius)


def wendland2(support_radius=1.0):
    return StarKernelSpec("wendland2", 2, support_radius)


def mff_localized(m=1.0, epsilon=1.0):
    """k_m(x) * phi(eps x); support radius 2/eps."""
    return StarKernelSpec("mff-localized", 2, 2 * _BUMP_RADIUS / epsilon, m=m, epsilon=epsilon)


@dataclass(frozen=True)
class MffSpec:
    m: float = 1.0
    d: int = 2

    def __post_init__(self):
        if self.m <= 0:
            raise KernelError("mass must be positive")
        if self.d != 2:
            raise KernelError("the massive free field is planar")

    @property
    def stationary(self):
        return True

    def radial(self, r):
        return mff_kernel_closed_form(r, self.m)

    def tail_radius(self, rel=1e-6):
        """Smallest r with K_0(m r) < rel, beyond which the full covariance is negligible."""
        from scipy.optimize import brentq

        return brentq(lambda z: special.k0(z) - rel, 1e-6, 200.0) / self.m


@dataclass(frozen=True)
class GffDomainSpec:
    """Dirichlet GFF on [0, width] x [0, height] with a sine eigen-series."""

    width: float = 1.0
    height: float = 1.0
    modes: int = 64
    margin: float = 0.1
    d: int = 2

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise KernelError("rectangle sides must be positive")
        if self.modes < 16:
            raise KernelError("eigen_truncation must be at least 16 modes per axis")
        if self.margin <= 0:
            raise KernelError("margin must be positive")

    @property
    def stationary(self):
        return False

    def check_inside(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        lo = self.margin - 1e-12
        ok = (
            (pts[:, 0] >= lo)
            & (pts[:, 0] <= self.width - lo)
            & (pts[:, 1] >= lo)
            & (pts[:, 1] <= self.height - lo)
        )
        if not np.all(ok):
            raise KernelError("points must keep the interior margin from the boundary")
        return pts


# ---------------------------------------------------------------------------
# star kernels: scalar evaluation by adaptive quadrature
# ---------------------------------------------------------------------------


def _norm(x):
    return float(np.linalg.norm(np.atleast_1d(np.asarray(x, dtype=float))))


def eval_star_kernel(spec, x):
    return float(spec.radial(_norm(x)))


def _upper_log_scale(spec, r):
    """ln of the scale at which k(r e^s) vanishes (inf for non-compact kernels)."""
    if r == 0:
        return math.inf
    R = getattr(spec, "support_radius", None)
    if isinstance(spec, StarKernelSpec):
        return math.log(R / r)
    # k_m(z) < 1e-30 once m z > 75
    return math.log(75.0 / (spec.m * r))


def _quad(f, a, b, tol, what):
    if b <= a:
        return 0.0
    val, err, *rest = integrate.quad(f, a, b, epsabs=tol / 10, epsrel=1e-13, limit=400, full_output=1)
    if err > tol:
        raise QuadratureError(f"{what} did not converge", err)
    return val


def eval_increment_cov(spec, x, t1, t2, tol=QUAD_TOL):
    """K_{t2}(x) - K_{t1}(x) = int_{t1}^{t2} k(|x| e^s) ds."""
    if t1 < 0 or t2 < t1:
        raise ValueError("need 0 <= t1 <= t2")
    r = _norm(x)
    if r == 0:
        return float(t2 - t1)
    hi = min(t2, _upper_log_scale(spec, r))
    if hi <= t1:
        return 0.0
    f = lambda s: float(spec.radial(r * math.exp(s)))
    return _quad(f, t1, hi, tol, "cut-off covariance")


def eval_cutoff_cov(spec, x, t, tol=QUAD_TOL):
    """K_t(x) for a star kernel (or G_{m,t} for an MffSpec)."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    return eval_increment_cov(spec, x, 0.0, t, tol)


_GL_X, _GL_W = np.polynomial.legendre.leggauss(24)


def cutoff_cov_table(spec, r, t1, t2, panel=0.25):
    """Vectorized int_{t1}^{t2} k(r e^s) ds by composite Gauss-Legendre.

    Each radius gets its own integration window [t1, min(t2, s_max(r))] split
    into the same number of panels, so panels never exceed ``panel`` in length.
    """
    r = np.abs(np.asarray(r, dtype=float))
    out = np.zeros_like(r)
    if t2 <= t1:
        return out
    if isinstance(spec, MffSpec):
        return mff_increment_closed_form(r, t1, t2, spec.m)
    flat = r.ravel()
    res = np.empty_like(flat)
    zero = flat == 0
    res[zero] = t2 - t1
    rr = flat[~zero]
    if rr.size:
        R = spec.support_radius
        hi = np.minimum(t2, np.log(R / rr))
        lo = np.full_like(rr, float(t1))
        length = np.clip(hi - lo, 0.0, None)
        npan = max(1, int(math.ceil((t2 - t1) / panel)))
        acc = np.zeros_like(rr)
        # chunk over radii to bound memory
        for start in range(0, rr.size, 4096):
            sl = slice(start, start + 4096)
            L = length[sl][:, None]
            h = L / npan
            k = np.arange(npan)[None, :, None]
            a = lo[sl][:, None, None] + k * h[:, :, None]
            s = a + 0.5 * h[:, :, None] * (_GL_X[None, None, :] + 1.0)
            vals = spec.radial(rr[sl][:, None, None] * np.exp(s))
            acc[sl] = 0.5 * h[:, 0] * np.einsum("ijk,k->i", vals, _GL_W)
        res[~zero] = acc
    return res.reshape(r.shape)


# ---------------------------------------------------------------------------
# massive free field
# ---------------------------------------------------------------------------


def eval_mff_kernel(spec, r, tol=QUAD_TOL):
    """k_m(r) = 1/2 int_0^inf exp(-m^2 r^2/(2v) - v/2) dv by adaptive quadrature."""
    if r < 0:
        raise ValueError("r must be nonnegative")
    a = 0.5 * (spec.m * r) ** 2
    if a == 0:
        return 1.0
    f = lambda v: 0.5 * math.exp(-a / v - v / 2) if v > 0 else 0.0
    # the integrand peaks at v = sqrt(2a); split there to help the adaptive rule
    peak = math.sqrt(2 * a)
    return _quad(f, 0.0, peak, tol / 2, "MFF kernel") + _quad(
        f, peak, peak + 200.0, tol / 2, "MFF kernel"
    )


def eval_mff_cutoff_cov(spec, x, t, tol=QUAD_TOL):
    """G_{m,t}(x) = int_1^{e^t} k_m(|x| u)/u du."""
    return eval_cutoff_cov(spec, x, t, tol)


def mff_cutoff_cov_closed_form(r, t, m=1.0):
    """G_{m,t}(r) = K_0(m r) - K_0(m r e^t) (t at r = 0)."""
    return mff_increment_closed_form(r, 0.0, t, m)


def mff_increment_closed_form(r, t1, t2, m=1.0):
    r = np.abs(np.asarray(r, dtype=float))
    z1 = m * r * math.exp(t1)
    z2 = m * r * math.exp(t2)
    safe1 = np.where(z1 > 0, z1, 1.0)
    safe2 = np.where(z2 > 0, z2, 1.0)
    # K_0(z1) - K_0(z2) loses digits for tiny z; use the log form there
    small = z2 < 1e-6
    diff = special.k0(safe1) - special.k0(safe2)
    out = np.where(small, t2 - t1, diff)
    return np.where(r == 0, float(t2 - t1), out)


def _sandwich_integrand(m, eps):
    return lambda v: float(mff_kernel_closed_form(v, m) * (1.0 - bump_phi(eps * v)) / v) if v > 0 else 0.0


def mff_sandwich_gap(m, eps, t_max, radii=None, times=None):
    """sup |K^eps_t(x) - G_{m,t}(x)| over a test set of radii and t <= t_max."""
    if eps <= 0:
        raise ValueError("epsilon must be positive")
    if radii is None:
        radii = np.concatenate([[0.0], np.logspace(-3, 1.3, 44)])
    if times is None:
        times = np.linspace(0.0, t_max, 11)
    loc = mff_localized(m, eps)
    mff = MffSpec(m)
    gap = 0.0
    for r in radii:
        for t in times:
            diff = abs(eval_cutoff_cov(loc, r, t) - eval_cutoff_cov(mff, r, t))
            gap = max(gap, diff)
    return gap


def mff_sandwich_split_bound(m, eps, cut=None):
    """Three-term bound int_0^inf k_m(v)|1 - phi(eps v)|/v dv split at 1 and R.

    Returns (near0, compact, tail) with tail = int_R^inf k_m(v)/v dv.
    """
    if cut is None:
        cut = 12.0 / m
    g = _sandwich_integrand(m, eps)
    near0 = integrate.quad(g, 0.0, 1.0, limit=200)[0]
    brk = [p for p in (1.0 / eps,) if 1.0 < p < cut]
    compact = integrate.quad(g, 1.0, cut, limit=200, points=brk or None)[0]
    tail = integrate.quad(lambda v: float(mff_kernel_closed_form(v, m)) / v, cut, np.inf, limit=200)[0]
    return near0, compact, tail


# ---------------------------------------------------------------------------
# Dirichlet GFF on a rectangle
# ---------------------------------------------------------------------------


def _gff_eigen(spec, J=None, K=None):
    J = spec.modes if J is None else J
    K = spec.modes if K is None else K
    j = np.arange(1, J + 1)
    k = np.arange(1, K + 1)
    lam = np.pi**2 * ((j[:, None] / spec.width) ** 2 + (k[None, :] / spec.height) ** 2)
    return j, k, lam


def _gff_weights(spec, t1, t2, J=None, K=None):
    """Mode weights of G_{D,t2} - G_{D,t1} (t1 = None means from -infinity)."""
    j, k, lam = _gff_eigen(spec, J, K)
    r2 = math.exp(-2 * t2)
    w = (2 * np.pi / lam) * np.exp(-0.5 * lam * r2)
    if t1 is not None:
        w = w - (2 * np.pi / lam) * np.exp(-0.5 * lam * math.exp(-2 * t1))
    return j, k, w


def gff_truncation_bound(spec, t, J=None, K=None):
    """Upper bound on |dropped modes| of G_{D,t}(x, y), uniform in x, y."""
    J = spec.modes if J is None else J
    K = spec.modes if K is None else K
    r0 = math.exp(-2 * t)
    W, H = spec.width, spec.height
    a = np.pi**2 * r0 / (2 * W**2)
    b = np.pi**2 * r0 / (2 * H**2)

    def tail_inv_sq(c, n):  # int_n^inf e^{-c u^2} u^{-2} du >= sum_{j>n} e^{-c j^2}/j^2
        return math.exp(-c * n * n) / n - math.sqrt(math.pi * c) * special.erfc(math.sqrt(c) * n)

    full_b = 0.5 * math.sqrt(math.pi / b)
    full_a = 0.5 * math.sqrt(math.pi / a)
    part1 = (W**2 / np.pi**2) * tail_inv_sq(a, J) * full_b
    part2 = (H**2 / np.pi**2) * tail_inv_sq(b, K) * full_a
    return float(4.0 / (W * H) * 2 * np.pi * (part1 + part2))


def gff_required_modes(width, height, t, tol=GFF_TOL):
    """Smallest per-axis truncation (>= 16) meeting ``tol`` at log-scale t."""
    n = 16
    while True:
        spec = GffDomainSpec(width, height, n, margin=1.0)
        if gff_truncation_bound(spec, t) < tol:
            return n
        n = int(n * 1.25) + 1


def _sines(spec, pts, J, K):
    pts = np.atleast_2d(pts)
    j = np.arange(1, J + 1)
    k = np.arange(1, K + 1)
    sx = np.sin(np.pi * pts[:, 0:1] * j[None, :] / spec.width)
    sy = np.sin(np.pi * pts[:, 1:2] * k[None, :] / spec.height)
    return sx, sy


def eval_gff_cutoff_cov(spec, x, y, t, tol=GFF_TOL):
    """G_{D,t}(x, y) = pi int_{e^{-2t}}^inf p_D(r, x, y) dr via the sine series."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    pts = spec.check_inside(np.vstack([x, y]))
    bound = gff_truncation_bound(spec, t)
    if bound > tol:
        raise QuadratureError(
            f"sine series truncated at {spec.modes} modes is too coarse for t={t}", bound
        )
    _, _, w = _gff_weights(spec, None, t)
    sx, sy = _sines(spec, pts, spec.modes, spec.modes)
    norm = 4.0 / (spec.width * spec.height)
    return float(norm * np.einsum("j,k,jk,j,k->", sx[0], sy[0], w, sx[1], sy[1]))


def gff_variance(spec, pts, t):
    """E[X_t(x)^2] at each point (no truncation check; see eval_gff_cutoff_cov)."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    _, _, w = _gff_weights(spec, None, t)
    sx, sy = _sines(spec, pts, spec.modes, spec.modes)
    return 4.0 / (spec.width * spec.height) * np.einsum("pj,jk,pk->p", sx**2, w, sy**2)


def generalized_radius(spec, x, t):
    """exp(E[X_t(x)^2] - t), the finite-t stand-in for the conformal radius factor."""
    return math.exp(eval_gff_cutoff_cov(spec, x, x, t) - t)


# ---------------------------------------------------------------------------
# diagnostics
# ---------------------------------------------------------------------------


def discrete_spectrum_min(spec, n=512, span=2.0):
    """Smallest eigenvalue of the sampled kernel on a periodic grid.

    The grid side is ``span`` times the support, so the periodization never
    overlaps itself; the circulant matrix eigenvalues are the FFT of the sample.
    """
    L = span * spec.support_radius
    h = L / n
    idx = np.arange(n)
    lag = np.minimum(idx, n - idx) * h
    if spec.d == 1:
        c = spec.radial(lag)
    else:
        c = spec.radial(np.hypot(lag[:, None], lag[None, :]))
    lam = np.real(np.fft.fftn(c))
    return float(lam.min())


def empirical_lipschitz(spec, r_min=1e-4, r_max=None, n=200):
    """max over small r of (k(0) - k(r)) / r: the constant of the Lipschitz-at-0 bound."""
    if r_max is None:
        r_max = getattr(spec, "support_radius", 1.0)
    r = np.geomspace(r_min, r_max, n)
    return float(np.max(np.abs(1.0 - spec.radial(r)) / r))


# ---------------------------------------------------------------------------
# renormalization constants
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RenormConstants:
    d: int
    gamma: float
    alpha: float
    super_poly_exponent: float
    super_exp_rate: float
    a_t_coefficient: float
    kappa: float

    def a_t(self, t):
        return -self.a_t_coefficient * math.log(t)


def make_renorm_constants(d, gamma):
    root = math.sqrt(2 * d)
    if not gamma > root:
        raise KernelError(f"not supercritical: gamma={gamma} <= sqrt(2d)={root:.6g}")
    return RenormConstants(
        d=d,
        gamma=float(gamma),
        alpha=root / gamma,
        super_poly_exponent=3 * gamma / (2 * root),
        super_exp_rate=(gamma / math.sqrt(2) - math.sqrt(d)) ** 2,
        a_t_coefficient=3 / (2 * root),
        kappa=1 / (8 * root),
    )


def stable_scale_constant(C, constants):
    """c with E exp(-theta c sum z) = exp(-C theta^alpha) under intensity z^{-1-alpha} dz."""
    if C <= 0:
        raise ValueError("C must be positive")
    a = constants.alpha
    return (C * a / math.gamma(1 - a)) ** (1 / a)


def scale_constant_inverse(c, constants):
    a = constants.alpha
    return c**a * math.gamma(1 - a) / a
