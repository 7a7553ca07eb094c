"""Grid samplers for the cut-off fields X_t, coupled across a time schedule.

A path is built from independent increments ``X_{t_{j+1}} - X_{t_j}``, each an
exact centered Gaussian field on the grid with covariance
``K_{t_{j+1}} - K_{t_j}``.  Stationary kernels use circulant embedding on a
periodic torus; the rectangle GFF uses the explicit factorization of its grid
covariance through the truncated Dirichlet sine basis.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import fft as sfft
from scipy import integrate

from . import kernels as kn
from .rng import stream

__all__ = [
    "FieldSamplingError",
    "GridSpec",
    "TimeSchedule",
    "FieldPath",
    "DecompositionReport",
    "IncrementSampler",
    "sample_increment",
    "sample_path",
    "sample_paths",
    "iter_path_blocks",
    "drifted_field",
    "decomposition_report",
    "scaling_check",
    "dump_field_path",
    "load_field_path",
]

SPECTRUM_CLIP = 1e-9
DENSE_JITTER = 1e-8
DENSE_MAX_POINTS = 4096
GFF_MAX_SIDE = 64
MFF_WRAP_TOL = 1e-6
_MFF_REACH_TOL = 1e-7  # per-image level; several images add up at a lag


class FieldSamplingError(RuntimeError):
    pass


@dataclass(frozen=True)
class GridSpec:
    """Regular grid of N^d cell centers in the box origin + [0, side]^d."""

    d: int
    n: int
    side: float = 1.0
    origin: tuple = None
    embedding_factor: int = 2

    def __post_init__(self):
        if self.d not in (1, 2):
            raise ValueError("grid dimension must be 1 or 2")
        if self.n < 2:
            raise ValueError("need at least 2 points per side")
        if self.embedding_factor < 2:
            raise ValueError("embedding factor must be an integer >= 2")
        if self.side <= 0:
            raise ValueError("side must be positive")
        if self.origin is None:
            object.__setattr__(self, "origin", (0.0,) * self.d)
        if len(self.origin) != self.d:
            raise ValueError("origin has the wrong dimension")

    @property
    def h(self):
        return self.side / self.n

    @property
    def shape(self):
        return (self.n,) * self.d

    @property
    def cell_volume(self):
        return self.h**self.d

    def axis(self, i=0):
        return self.origin[i] + (np.arange(self.n) + 0.5) * self.h

    def points(self):
        """Cell centers, shape (*shape, d)."""
        axes = [self.axis(i) for i in range(self.d)]
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)

    def check_embedding(self, kernel):
        """The torus must exceed the box by the kernel support (no aliasing)."""
        R = getattr(kernel, "support_radius", None)
        if R is not None and self.embedding_factor * self.side < self.side + R:
            raise ValueError(
                f"embedding factor {self.embedding_factor} too small for support {R}: "
                f"need factor*side >= side + support"
            )


@dataclass(frozen=True)
class TimeSchedule:
    times: tuple

    def __post_init__(self):
        ts = tuple(float(t) for t in self.times)
        if not ts:
            raise ValueError("schedule needs at least one time")
        if ts[0] < 0 or any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValueError("schedule must be strictly increasing and nonnegative")
        object.__setattr__(self, "times", ts)

    def __len__(self):
        return len(self.times)

    def __iter__(self):
        return iter(self.times)

    def index(self, t):
        for j, s in enumerate(self.times):
            if abs(s - t) < 1e-12:
                return j
        raise KeyError(f"t={t} is not in the schedule")


@dataclass
class FieldPath:
    """Samples X_{t_j}(x_i); values have shape (replicas, len(schedule), *grid.shape)."""

    grid: GridSpec
    schedule: TimeSchedule
    kernel: object
    values: np.ndarray
    seed: int = 0
    streams: np.ndarray = field(default_factory=lambda: np.zeros(1, dtype=np.int64))

    @property
    def n_replicas(self):
        return self.values.shape[0]

    def at(self, t):
        return self.values[:, self.schedule.index(t)]

    def variance(self, t):
        """E[X_t(x)^2] per grid point (t for star/MFF kernels)."""
        if isinstance(self.kernel, kn.GffDomainSpec):
            pts = self.grid.points().reshape(-1, 2)
            return kn.gff_variance(self.kernel, pts, t).reshape(self.grid.shape)
        return np.full(self.grid.shape, float(t))


# ---------------------------------------------------------------------------
# increment samplers
# ---------------------------------------------------------------------------


def _lag_axis(m, h):
    idx = np.arange(m)
    return np.minimum(idx, m - idx) * h


def _reach(kernel, t1):
    """Distance beyond which the increment covariance from t1 is (negligibly) zero."""
    if isinstance(kernel, kn.MffSpec):
        return kernel.tail_radius(_MFF_REACH_TOL) * math.exp(-t1)
    return kernel.support_radius * math.exp(-t1)


class IncrementSampler:
    """Maps standard normal noise to one increment field on ``grid``.

    ``noise_size`` normals per replica are consumed by :meth:`apply`.
    ``method`` is ``"circulant"``, ``"dense"`` or ``"gff-sine"``.
    """

    def __init__(self, grid, kernel, t1, t2, force_dense=False):
        # t1=None starts a GFF increment at r = infinity, i.e. includes G_{D,0}
        if t1 is None and not isinstance(kernel, kn.GffDomainSpec):
            raise ValueError("only the GFF has a field at t=0 to start from")
        if (t1 is not None and t1 < 0) or t2 < (t1 or 0.0):
            raise ValueError("need 0 <= t1 <= t2")
        self.grid, self.kernel, self.t1, self.t2 = grid, kernel, t1, t2
        self.wrap_error = 0.0
        if isinstance(kernel, kn.GffDomainSpec):
            self._setup_gff()
        elif force_dense:
            self._setup_dense()
        else:
            self._setup_circulant()

    # -- stationary kernels ------------------------------------------------

    def _increment_cov(self, r):
        return kn.cutoff_cov_table(self.kernel, r, self.t1, self.t2)

    def _setup_circulant(self):
        g, k = self.grid, self.kernel
        g.check_embedding(k)
        reach = _reach(k, self.t1)
        need = max(g.side + reach, 2 * reach) if not isinstance(k, kn.MffSpec) else g.side + reach
        m = max(g.embedding_factor * g.n, int(math.ceil(need / g.h)))
        m = sfft.next_fast_len(m + (m % 2), real=True)
        if m % 2:
            m += 1
        L = m * g.h
        lag = _lag_axis(m, g.h)
        if g.d == 1:
            rad = lag
        else:
            rad = np.hypot(lag[:, None], lag[None, :])
        c = self._increment_cov(rad)
        if isinstance(k, kn.MffSpec):
            c = c + self._mff_images(lag, L)
            if self.wrap_error > MFF_WRAP_TOL:
                raise FieldSamplingError(f"MFF wrapped tail {self.wrap_error:.2e} exceeds {MFF_WRAP_TOL}")
        lam = np.real(sfft.fftn(c))
        scale = max(1.0, float(np.abs(lam).max()))
        if lam.min() < -SPECTRUM_CLIP * scale:
            self._setup_dense()
            return
        lam = np.clip(lam, 0.0, None)
        self.method = "circulant"
        self.m = m
        self._sqrt_half = np.sqrt(lam[..., : m // 2 + 1])
        self.noise_size = m**g.d

    def _mff_images(self, lag, L):
        """Periodization terms sum_{n != 0} c(lag + n L) for the MFF increment."""
        g, k = self.grid, self.kernel
        extra = np.zeros((lag.size,) * g.d)
        ring = 1
        while True:
            # smallest distance reached by this ring of images is ~ (ring - 1/2) L
            rmin = (ring - 0.5) * L
            bound = float(kn.mff_increment_closed_form(np.array([rmin]), self.t1, self.t2, k.m)[0])
            if bound * (8 * ring) < 1e-16:
                break
            signed = np.where(np.arange(lag.size) <= lag.size // 2, lag, -lag)
            for nx in range(-ring, ring + 1):
                for ny in range(-ring, ring + 1):
                    if max(abs(nx), abs(ny)) != ring:
                        continue
                    rad = np.hypot(signed[:, None] + nx * L, signed[None, :] + ny * L)
                    extra += kn.mff_increment_closed_form(rad, self.t1, self.t2, k.m)
            ring += 1
        # wrapped-tail bias seen by lags inside the box
        inside = lag <= g.side + 1e-12
        self.wrap_error = float(np.abs(extra[np.ix_(inside, inside)]).max()) if extra.size else 0.0
        return extra

    def _setup_dense(self):
        g = self.grid
        npts = g.n**g.d
        if npts > DENSE_MAX_POINTS:
            raise FieldSamplingError(f"dense factorization limited to {DENSE_MAX_POINTS} points")
        pts = g.points().reshape(npts, g.d)
        diff = pts[:, None, :] - pts[None, :, :]
        rad = np.sqrt((diff**2).sum(-1))
        cov = self._increment_cov(rad)
        w, v = np.linalg.eigh(cov)
        if w.min() < -DENSE_JITTER * max(1.0, w.max()):
            raise FieldSamplingError(f"covariance is not PSD: smallest eigenvalue {w.min():.3e}")
        self.method = "dense"
        self._factor = v * np.sqrt(np.clip(w, 0.0, None))
        self.noise_size = npts

    # -- rectangle GFF -----------------------------------------------------

    def _setup_gff(self):
        g, k = self.grid, self.kernel
        if g.d != 2:
            raise FieldSamplingError("the GFF lives on a planar rectangle")
        if g.n > GFF_MAX_SIDE:
            raise FieldSamplingError(f"GFF grids are limited to {GFF_MAX_SIDE}x{GFF_MAX_SIDE}")
        k.check_inside(g.points().reshape(-1, 2))
        bound = kn.gff_truncation_bound(k, self.t2)
        if bound > kn.GFF_TOL:
            raise FieldSamplingError(
                f"{k.modes} sine modes leave a truncation residual {bound:.2e} at t={self.t2}"
            )
        _, _, w = kn._gff_weights(k, self.t1, self.t2)
        norm = 2.0 / math.sqrt(k.width * k.height)
        J = np.arange(1, k.modes + 1)
        self._ux = norm * np.sin(np.pi * g.axis(0)[:, None] * J[None, :] / k.width)
        self._uy = np.sin(np.pi * g.axis(1)[:, None] * J[None, :] / k.height)
        self._sqrt_w = np.sqrt(np.clip(w, 0.0, None))
        self.method = "gff-sine"
        self.noise_size = k.modes * k.modes

    # ----------------------------------------------------------------------

    def apply(self, noise):
        """noise: (R, noise_size) standard normals -> (R, *grid.shape) fields."""
        noise = np.asarray(noise, dtype=float)
        R = noise.shape[0]
        g = self.grid
        if self.t2 == self.t1:
            return np.zeros((R,) + g.shape)
        if self.method == "circulant":
            axes = tuple(range(1, g.d + 1))
            xi = noise.reshape((R,) + (self.m,) * g.d)
            f = sfft.rfftn(xi, axes=axes)
            f *= self._sqrt_half
            y = sfft.irfftn(f, s=(self.m,) * g.d, axes=axes)
            sl = (slice(None),) + (slice(0, g.n),) * g.d
            return np.ascontiguousarray(y[sl])
        if self.method == "dense":
            return (noise @ self._factor.T).reshape((R,) + g.shape)
        k = self.kernel
        xi = noise.reshape(R, k.modes, k.modes) * self._sqrt_w
        return np.einsum("xj,rjk,yk->rxy", self._ux, xi, self._uy, optimize=True)

    def draw(self, rng, size=1):
        return self.apply(rng.standard_normal((size, self.noise_size)))


def sample_increment(grid, kernel, t1, t2, rng, size=None):
    """One exact sample (or ``size`` samples) of X_{t2} - X_{t1} on the grid."""
    s = IncrementSampler(grid, kernel, t1, t2)
    out = s.draw(rng, 1 if size is None else size)
    return out[0] if size is None else out


def _samplers(grid, kernel, schedule):
    start = None if isinstance(kernel, kn.GffDomainSpec) else 0.0
    edges = (start,) + schedule.times
    return [IncrementSampler(grid, kernel, a, b) for a, b in zip(edges[:-1], edges[1:])]


def sample_paths(grid, kernel, schedule, n_replicas, seed=0, first_stream=0, samplers=None):
    """Replicas ``first_stream .. first_stream + n_replicas - 1`` of the coupled path.

    Increment j of replica r consumes the stream keyed by (seed, r, j) only, so
    a replica is bit-identical however the ensemble is blocked or scheduled.
    """
    if samplers is None:
        samplers = _samplers(grid, kernel, schedule)
    ids = np.arange(first_stream, first_stream + n_replicas, dtype=np.int64)
    out = np.empty((n_replicas, len(schedule)) + grid.shape)
    acc = np.zeros((n_replicas,) + grid.shape)
    for j, s in enumerate(samplers):
        noise = np.empty((n_replicas, s.noise_size))
        for i, r in enumerate(ids):
            noise[i] = stream(seed, r, j).standard_normal(s.noise_size)
        acc = acc + s.apply(noise)
        out[:, j] = acc
    return FieldPath(grid, schedule, kernel, out, seed, ids)


def sample_path(grid, kernel, schedule, seed=0, stream_id=0):
    return sample_paths(grid, kernel, schedule, 1, seed, stream_id)


def iter_path_blocks(grid, kernel, schedule, n_replicas, seed=0, block=256, first_stream=0):
    """Yield FieldPath blocks covering the replica range in stream order."""
    samplers = _samplers(grid, kernel, schedule)
    for start in range(0, n_replicas, block):
        n = min(block, n_replicas - start)
        yield sample_paths(grid, kernel, schedule, n, seed, first_stream + start, samplers)


def drifted_field(path):
    """Y_t(x) = X_t(x) - sqrt(2d) t, same shape as path.values."""
    if isinstance(path.kernel, kn.GffDomainSpec):
        raise ValueError("the drifted field is defined for star and MFF kernels")
    t = np.asarray(path.schedule.times).reshape((1, -1) + (1,) * path.grid.d)
    return path.values - math.sqrt(2 * path.grid.d) * t


# ---------------------------------------------------------------------------
# covariance identities
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DecompositionReport:
    x: tuple
    u: tuple
    t: float
    var_P: float
    var_Z: float
    zeta: float


def decomposition_report(kernel, x, u, t, tol=1e-12):
    """Variances of the (Y_t(x))-measurable part and the independent remainder of Y_t(u)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    u = np.atleast_1d(np.asarray(u, dtype=float))
    r = float(np.linalg.norm(x - u))
    if r == 0:
        raise ValueError("decomposition needs u != x")
    s_star = min(t, math.log(kernel.support_radius / r))
    root = math.sqrt(2 * kernel.d)

    def q(f, a, b):
        if b <= a:
            return 0.0
        val, err = integrate.quad(f, a, b, epsabs=tol, epsrel=1e-13, limit=400)
        if err > 100 * tol:
            raise kn.QuadratureError("decomposition integral did not converge", err)
        return val

    k = lambda s: float(kernel.radial(r * math.exp(s)))
    var_P = q(lambda s: k(s) ** 2, 0.0, s_star)
    var_Z = q(lambda s: 1.0 - k(s) ** 2, 0.0, s_star) + max(0.0, t - max(s_star, 0.0))
    zeta = root * t - root * q(k, 0.0, s_star)
    return DecompositionReport(tuple(x), tuple(u), float(t), var_P, var_Z, zeta)


def scaling_check(kernel, s, t, lags):
    """max over lags of |(K_{s+t}(x) - K_s(x)) - K_t(x e^s)|."""
    if s < 0 or t < 0:
        raise ValueError("s and t must be nonnegative")
    dev = 0.0
    for x in lags:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        lhs = kn.eval_cutoff_cov(kernel, x, s + t) - kn.eval_cutoff_cov(kernel, x, s)
        rhs = kn.eval_cutoff_cov(kernel, x * math.exp(s), t)
        dev = max(dev, abs(lhs - rhs))
    return dev


# ---------------------------------------------------------------------------
# binary dumps
# ---------------------------------------------------------------------------


def _kernel_tag(kernel):
    if isinstance(kernel, kn.StarKernelSpec):
        return {"kernel": kernel.family, "support_radius": kernel.support_radius,
                "m": kernel.m, "epsilon": kernel.epsilon}
    if isinstance(kernel, kn.MffSpec):
        return {"kernel": "mff", "m": kernel.m}
    return {"kernel": "gff-rect", "rect_w": kernel.width, "rect_h": kernel.height,
            "modes": kernel.modes, "margin": kernel.margin}


def dump_field_path(path, fh):
    """One JSON header line, then little-endian float64 values in row-major order."""
    header = {
        "shape": list(path.values.shape),
        "dtype": "<f8",
        "order": "C",
        "d": path.grid.d,
        "n": path.grid.n,
        "side": path.grid.side,
        "origin": list(path.grid.origin),
        "schedule": list(path.schedule.times),
        "seed": int(path.seed),
        "streams": [int(s) for s in path.streams],
        **_kernel_tag(path.kernel),
    }
    fh.write((json.dumps(header, sort_keys=True) + "\n").encode())
    fh.write(np.ascontiguousarray(path.values, dtype="<f8").tobytes(order="C"))


def load_field_path(fh):
    """Inverse of :func:`dump_field_path`: returns (header dict, values array)."""
    header = json.loads(fh.readline().decode())
    data = np.frombuffer(fh.read(), dtype="<f8")
    return header, data.reshape(header["shape"])
