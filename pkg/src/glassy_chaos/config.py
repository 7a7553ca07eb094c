"""Experiment configuration: an INI file with one section per concern.

Example::

    [kernel]
    kind = triangle1d

    [grid]
    d = 1
    n = 1024

    [run]
    schedule = 2, 4, 6, 8
    gammas = 0.5, 1.0, 2.0, 2.5
    replicas = 2000
    seed = 0

Lists are comma separated, booleans are true/false.  Every key has a default
(the desk-scale profile), so an empty file is a valid config.
"""
from __future__ import annotations

import configparser
import dataclasses
import hashlib
import io
import math
from dataclasses import dataclass, field, fields

__all__ = ["ConfigError", "ExperimentConfig", "parse_config", "load_config", "dump_config", "config_hash"]

KERNEL_KINDS = ("triangle1d", "wendland2", "mff", "mff-localized", "gff-rect")


class ConfigError(ValueError):
    """Raised with every validation problem, each prefixed by its ``section.key`` path."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass
class KernelSection:
    kind: str = "triangle1d"
    m: float = 1.0
    epsilon: float = 0.125
    rect_w: float = 1.0
    rect_h: float = 1.0
    modes: int = 64
    margin: float = 0.05


@dataclass
class GridSection:
    d: int = 1
    n: int = 1024
    side: float = 1.0
    embedding_factor: int = 2


@dataclass
class RunSection:
    schedule: tuple = (2.0, 4.0, 6.0, 8.0)
    gammas: tuple = (0.5, 1.0, 2.0, 2.5)
    replicas: int = 2000
    seed: int = 0
    thetas: tuple = tuple(10.0 ** (k / 3 - 2) for k in range(13))
    out: str = "results"
    workers: int = 1
    block: int = 100


@dataclass
class LimitSection:
    d: int = 2
    gamma: float = 4.0
    mu: float = 1.0
    c_gamma: float = 1.0
    z_min: float = 1e-6
    replicas: int = 100000


@dataclass
class PdSection:
    alphas: tuple = (0.25, 0.5, 0.75)
    n_top: int = 8
    replicas: int = 2000


@dataclass
class BrwSection:
    depths: tuple = (6, 10, 14, 18)
    beta: float = 2 * math.sqrt(2 * math.log(2))
    replicas: int = 500


@dataclass
class FreezeSection:
    fit_from: float = 5.0  # early times carry the finite-t drift of E ln M_t
    log_correction: bool = True


@dataclass
class EstimateSection:
    t0: float = 1.0
    t_final: float = 4.0
    replicas: int = 500


@dataclass
class ReportSection:
    criteria: tuple = tuple(range(1, 11))


@dataclass
class ExperimentConfig:
    kernel: KernelSection = field(default_factory=KernelSection)
    grid: GridSection = field(default_factory=GridSection)
    run: RunSection = field(default_factory=RunSection)
    limit: LimitSection = field(default_factory=LimitSection)
    pd: PdSection = field(default_factory=PdSection)
    brw: BrwSection = field(default_factory=BrwSection)
    freeze: FreezeSection = field(default_factory=FreezeSection)
    estimate: EstimateSection = field(default_factory=EstimateSection)
    report: ReportSection = field(default_factory=ReportSection)

    # -- model objects ----------------------------------------------------

    def make_kernel(self):
        from . import kernels as kn

        k, d = self.kernel, self.grid.d
        if k.kind == "triangle1d":
            return kn.triangle1d()
        if k.kind == "wendland2":
            return kn.wendland2()
        if k.kind == "mff-localized":
            return kn.mff_localized(k.m, k.epsilon)
        if k.kind == "mff":
            return kn.MffSpec(k.m, d)
        return kn.GffDomainSpec(k.rect_w, k.rect_h, k.modes, k.margin)

    def make_grid(self):
        from .fields import GridSpec

        g = self.grid
        if self.kernel.kind == "gff-rect":
            # the grid covers the interior region D' of the rectangle
            k = self.kernel
            side = min(k.rect_w, k.rect_h) - 2 * k.margin
            return GridSpec(2, g.n, side, (k.margin, k.margin), g.embedding_factor)
        return GridSpec(g.d, g.n, g.side, None, g.embedding_factor)

    def make_schedule(self):
        from .fields import TimeSchedule

        return TimeSchedule(tuple(self.run.schedule))


_SECTIONS = {f.name: f.type for f in fields(ExperimentConfig)}


def _section_types(name):
    return {f.name: f for f in fields(type(getattr(ExperimentConfig(), name)))}


def _convert(raw, default):
    if isinstance(default, bool):
        low = raw.strip().lower()
        if low not in ("true", "false"):
            raise ValueError("expected true or false")
        return low == "true"
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, float):
        return float(raw)
    if isinstance(default, tuple):
        items = [s.strip() for s in raw.split(",") if s.strip()]
        kind = type(default[0]) if default else float
        return tuple(kind(s) for s in items)
    return raw.strip()


def _format(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ", ".join(_format(v) for v in value)
    return str(value)


def parse_config(text):
    """Parse INI text into a validated ExperimentConfig (raises ConfigError)."""
    cp = configparser.ConfigParser(interpolation=None)
    errors = []
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError([f"syntax: {exc}"]) from exc
    cfg = ExperimentConfig()
    for sec in cp.sections():
        if sec not in _SECTIONS:
            errors.append(f"{sec}: unknown section")
            continue
        target = getattr(cfg, sec)
        known = _section_types(sec)
        for key, raw in cp.items(sec):
            if key not in known:
                errors.append(f"{sec}.{key}: unknown key")
                continue
            try:
                setattr(target, key, _convert(raw, getattr(target, key)))
            except ValueError as exc:
                errors.append(f"{sec}.{key}: {exc}")
    errors += validate(cfg)
    if errors:
        raise ConfigError(errors)
    return cfg


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def dump_config(cfg):
    cp = configparser.ConfigParser(interpolation=None)
    for sec in _SECTIONS:
        part = getattr(cfg, sec)
        cp[sec] = {f.name: _format(getattr(part, f.name)) for f in fields(part)}
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()


def config_hash(cfg):
    return hashlib.sha256(dump_config(cfg).encode()).hexdigest()[:16]


def validate(cfg):
    """All precondition violations as ``section.key: message`` strings."""
    e = []
    k, g, r = cfg.kernel, cfg.grid, cfg.run
    if k.kind not in KERNEL_KINDS:
        e.append(f"kernel.kind: must be one of {', '.join(KERNEL_KINDS)}")
    if k.m <= 0:
        e.append("kernel.m: must be positive")
    if k.epsilon <= 0:
        e.append("kernel.epsilon: must be positive")
    if k.modes < 16:
        e.append("kernel.modes: at least 16 sine modes per axis")
    if k.margin <= 0:
        e.append("kernel.margin: must be positive")
    if k.rect_w <= 2 * k.margin or k.rect_h <= 2 * k.margin:
        e.append("kernel.rect_w: rectangle must exceed twice the margin")
    if g.d not in (1, 2):
        e.append("grid.d: must be 1 or 2")
    if g.n < 2:
        e.append("grid.n: at least 2 points per side")
    if g.side <= 0:
        e.append("grid.side: must be positive")
    if g.embedding_factor < 2:
        e.append("grid.embedding_factor: at least 2")
    if k.kind == "triangle1d" and g.d != 1:
        e.append("grid.d: triangle1d is a one-dimensional kernel")
    if k.kind in ("wendland2", "mff-localized", "gff-rect") and g.d != 2:
        e.append(f"grid.d: {k.kind} is a two-dimensional kernel")
    if k.kind == "gff-rect" and g.n > 64:
        e.append("grid.n: GFF sampling is limited to 64 points per side")
    s = r.schedule
    if not s or any(t < 0 for t in s) or any(b <= a for a, b in zip(s, s[1:])):
        e.append("run.schedule: strictly increasing nonnegative times required")
    if any(x < 0 for x in r.gammas):
        e.append("run.gammas: must be nonnegative")
    if r.replicas < 2:
        e.append("run.replicas: at least 2")
    if r.seed < 0:
        e.append("run.seed: must be nonnegative")
    if not r.thetas or any(x < 0 for x in r.thetas):
        e.append("run.thetas: nonnegative values required")
    if r.workers < 1:
        e.append("run.workers: at least 1")
    if r.block < 1:
        e.append("run.block: at least 1")
    lm = cfg.limit
    if lm.d not in (1, 2):
        e.append("limit.d: must be 1 or 2")
    elif not lm.gamma > math.sqrt(2 * lm.d):
        e.append(f"limit.gamma: not supercritical (gamma must exceed sqrt(2d) = {math.sqrt(2 * lm.d):.6g})")
    if lm.mu <= 0:
        e.append("limit.mu: must be positive")
    if lm.c_gamma <= 0:
        e.append("limit.c_gamma: must be positive")
    if lm.z_min <= 0:
        e.append("limit.z_min: must be positive")
    if lm.replicas < 2:
        e.append("limit.replicas: at least 2")
    if any(not 0 < a < 1 for a in cfg.pd.alphas) or not cfg.pd.alphas:
        e.append("pd.alphas: values in (0, 1) required")
    if cfg.pd.n_top < 1:
        e.append("pd.n_top: at least 1")
    if any(not 1 <= n <= 22 for n in cfg.brw.depths) or not cfg.brw.depths:
        e.append("brw.depths: depths in [1, 22] required")
    if cfg.brw.beta <= 0:
        e.append("brw.beta: must be positive")
    if len([t for t in s if t >= cfg.freeze.fit_from]) < 2:
        e.append("freeze.fit_from: at least two run.schedule times must be >= fit_from")
    est = cfg.estimate
    if not 0 <= est.t0 < est.t_final:
        e.append("estimate.t0: need 0 <= t0 < t_final")
    if est.replicas < 100:
        e.append("estimate.replicas: at least 100")
    if any(c not in range(1, 11) for c in cfg.report.criteria):
        e.append("report.criteria: ids between 1 and 10")
    return e


def replace(cfg, **sections):
    """Copy of ``cfg`` with whole sections swapped (used by the CLI overrides)."""
    return dataclasses.replace(cfg, **sections)
