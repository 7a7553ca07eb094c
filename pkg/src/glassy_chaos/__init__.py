"""Monte Carlo laboratory for log-correlated fields in the glassy (supercritical) phase.

Modules: :mod:`kernels` (covariances and constants), :mod:`fields` (exact
samplers), :mod:`measures` (chaos measures and diagnostics), :mod:`limit_law`
(the stable Poisson limit and Poisson-Dirichlet weights), :mod:`stats`
(estimators), :mod:`cascade` (branching random walk oracle) and :mod:`cli`.
"""
from . import cascade, fields, kernels, limit_law, measures, stats
from .config import ExperimentConfig, parse_config
from .fields import FieldPath, GridSpec, TimeSchedule, sample_path, sample_paths
from .kernels import MffSpec, GffDomainSpec, StarKernelSpec, make_renorm_constants

__all__ = [
    "cascade",
    "fields",
    "kernels",
    "limit_law",
    "measures",
    "stats",
    "ExperimentConfig",
    "parse_config",
    "FieldPath",
    "GridSpec",
    "TimeSchedule",
    "sample_path",
    "sample_paths",
    "StarKernelSpec",
    "MffSpec",
    "GffDomainSpec",
    "make_renorm_constants",
]
