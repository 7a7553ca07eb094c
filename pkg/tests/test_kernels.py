import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as hs

from glassy_chaos import kernels as kn


def test_triangle_cutoff_value_frozen():
    # ln 4 - 3/4: the triangle profile is exhausted after s = ln 4
    assert kn.eval_cutoff_cov(kn.triangle1d(), 0.25, 3.0) == pytest.approx(0.6362943611198906, abs=1e-12)
    assert kn.eval_cutoff_cov(kn.triangle1d(), 0.25, 3.0) == pytest.approx(math.log(4) - 0.75, abs=1e-12)


@pytest.mark.parametrize("spec", [kn.triangle1d(), kn.wendland2(), kn.mff_localized(1.0, 0.5)])
@pytest.mark.parametrize("t", [0.5, 2.0, 6.0])
def test_cutoff_variance_equals_t(spec, t):
    assert kn.eval_cutoff_cov(spec, 0.0, t) == pytest.approx(t, abs=1e-10)


def test_mff_kernel_closed_form():
    assert float(kn.eval_mff_kernel(kn.MffSpec(1.0), 1.0)) == pytest.approx(0.6019072301972346, abs=1e-10)
    assert float(kn.mff_kernel_closed_form(0.0)) == 1.0


def test_mff_cutoff_closed_form_matches_quadrature():
    quad = float(kn.eval_mff_cutoff_cov(kn.MffSpec(1.0), 0.5, 3.0))
    assert quad == pytest.approx(0.9244020710461476, abs=1e-10)
    assert float(kn.mff_cutoff_cov_closed_form(0.5, 3.0)) == pytest.approx(quad, abs=1e-10)


def test_mff_increment_is_difference_of_cutoffs():
    a = kn.mff_cutoff_cov_closed_form(0.3, 4.0) - kn.mff_cutoff_cov_closed_form(0.3, 1.5)
    assert float(kn.mff_increment_closed_form(0.3, 1.5, 4.0)) == pytest.approx(float(a), abs=1e-12)


def test_sandwich_gaps_frozen_and_bounded():
    frozen = [0.8438198305175724, 0.4104757877697587, 0.15661205558188263, 0.04865728360714883]
    for eps, g in zip([1.0, 0.5, 0.25, 0.125], frozen):
        gap = kn.mff_sandwich_gap(1.0, eps, 5.0)
        assert gap == pytest.approx(g, rel=1e-8)
        assert gap <= sum(kn.mff_sandwich_split_bound(1.0, eps)) + 1e-12


def test_bump_phi_support_and_normalisation():
    assert float(kn.bump_phi(0.0)) == pytest.approx(1.0)
    assert float(kn.bump_phi(2.0)) == 0.0
    r = np.linspace(0, 2, 50)
    assert np.all(np.diff(kn.bump_phi(r)) <= 1e-12)


def test_renorm_constants():
    c = kn.make_renorm_constants(2, 4.0)
    assert c.alpha == pytest.approx(0.5)
    assert c.super_poly_exponent == pytest.approx(3.0)
    assert c.super_exp_rate == pytest.approx((4 / math.sqrt(2) - math.sqrt(2)) ** 2)
    with pytest.raises(kn.KernelError, match="not supercritical"):
        kn.make_renorm_constants(2, 2.0)


def test_scale_constant_roundtrip():
    c = kn.make_renorm_constants(1, 2.5)
    assert kn.scale_constant_inverse(kn.stable_scale_constant(1.7, c), c) == pytest.approx(1.7)
    with pytest.raises(ValueError):
        kn.stable_scale_constant(0.0, c)


def test_gff_variance_close_to_t_in_interior():
    spec = kn.GffDomainSpec(1.0, 1.0, 64, 0.1)
    v = kn.gff_variance(spec, np.array([[0.5, 0.5]]), 2.0)
    # the interior variance is t plus a bounded harmonic correction
    assert abs(float(v[0]) - 2.0) < 1.0


def test_gff_rejects_points_outside():
    spec = kn.GffDomainSpec(1.0, 1.0, 64, 0.1)
    with pytest.raises(kn.KernelError):
        spec.check_inside(np.array([[0.01, 0.5]]))


@settings(max_examples=40, deadline=None)
@given(x=hs.floats(0.01, 0.9), s=hs.floats(0.0, 2.0), t=hs.floats(0.1, 4.0))
def test_scaling_identity_property(x, s, t):
    # K_{t+s}(x) = K_s(x) + K_t(x e^s)
    spec = kn.triangle1d()
    lhs = kn.eval_cutoff_cov(spec, x, t + s)
    rhs = kn.eval_cutoff_cov(spec, x, s) + kn.eval_cutoff_cov(spec, x * math.exp(s), t)
    assert lhs == pytest.approx(rhs, abs=1e-9)


@settings(max_examples=30, deadline=None)
@given(x=hs.floats(0.0, 3.0), t1=hs.floats(0.0, 3.0), dt=hs.floats(0.0, 3.0))
def test_increment_nonnegative_and_bounded(x, t1, dt):
    v = kn.eval_increment_cov(kn.wendland2(), x, t1, t1 + dt)
    assert -1e-12 <= v <= dt + 1e-12
