import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as hs

from glassy_chaos import kernels as kn
from glassy_chaos import limit_law as ll
from glassy_chaos.rng import stream


@pytest.fixture
def consts():
    return kn.make_renorm_constants(2, 4.0)


def test_truncation_bias_frozen(consts):
    # c mu z^(1/2) / (1/2) over (C mu)^2 with alpha = 1/2, C = mu = 1, z_min = 1e-6
    assert ll.truncation_bias_ratio(1.0, consts, 1.0) == pytest.approx(1.5915494309189532e-4, rel=1e-12)
    assert ll.truncation_bias_ratio(1.0, consts, 1.0) < ll.TRUNCATION_BIAS_LIMIT


def test_laplace_exact(consts):
    th = np.array([0.0, 1.0, 4.0])
    np.testing.assert_allclose(ll.laplace_exact(th, 2.0, consts, 0.5), np.exp(-2.0 * th**0.5 * 0.5))
    with pytest.raises(ValueError):
        ll.laplace_exact(-1.0, 1.0, consts, 1.0)


def test_stable_totals_laplace(consts):
    s = ll.sample_stable_totals(1.0, consts, 1.0, 20000, seed=3)
    for th in (0.1, 1.0, 10.0):
        v = np.exp(-th * s)
        assert abs(v.mean() - math.exp(-math.sqrt(th))) < 4 * v.std() / math.sqrt(v.size)


def test_stable_totals_block_invariance(consts):
    a = ll.sample_stable_totals(1.0, consts, 1.0, 2500, seed=1)
    b = ll.sample_stable_totals(1.0, consts, 1.0, 2500, seed=1)
    np.testing.assert_array_equal(a, b)


def test_stable_measure_and_csv(consts):
    inten = ll.IntensityMeasure.deterministic(1.0, d=2)
    m = ll.sample_stable_measure(inten, consts, 1.0, z_min=1e-3, rng=stream(5))
    assert m.locations.shape == (m.masses.size, 2)
    assert np.all((m.locations >= 0) & (m.locations < 1))
    assert m.mass_in([0, 0], [1, 1]) == pytest.approx(m.retained)
    buf = io.StringIO()
    ll.write_atoms_csv(m, buf, ["seed: 5"])
    lines = buf.getvalue().splitlines()
    assert lines[0] == "# seed: 5" and lines[1] == "x,y,z"
    assert len(lines) == 2 + m.masses.size


def test_intensity_restrict():
    inten = ll.IntensityMeasure.deterministic(2.0, d=2)
    assert inten.restrict([0, 0], [0.5, 0.5]).mass == pytest.approx(0.5)
    with pytest.raises(ValueError):
        ll.IntensityMeasure.deterministic(0.0)


def test_z_min_must_be_positive(consts):
    with pytest.raises(ValueError):
        ll.sample_stable_totals(1.0, consts, 1.0, 10, z_min=0.0)


@pytest.mark.parametrize("alpha", [0.25, 0.5, 0.75])
def test_pd_mean_sum_of_squares(alpha):
    # E sum w^2 = 1 - alpha exactly for PD(alpha, 0)
    for method in ("poisson", "stick"):
        _, pr = ll.pd_ensemble(alpha, 4, 1500, seed=2, method=method)
        assert abs(pr.mean() - (1 - alpha)) < 4 * pr.std() / math.sqrt(pr.size)


def test_pd_weights_ranked_and_substochastic():
    w = ll.pd_weights_from_poisson(0.5, 10, stream(1))
    assert np.all(np.diff(w) <= 0) and w.sum() <= 1
    w = ll.pd_weights_stick_breaking(0.5, 10, stream(1))
    assert np.all(np.diff(w) <= 0) and w.sum() <= 1
    with pytest.raises(ValueError):
        ll.pd_sample(1.0, 3, 2)


@settings(max_examples=25, deadline=None)
@given(mu=hs.floats(0.1, 10), z=hs.floats(1e-8, 1e-2), a=hs.floats(0.1, 0.9))
def test_aggregate_is_monotone_in_z_min(mu, z, a):
    assert ll.small_mass_aggregate(mu, a, z / 2) < ll.small_mass_aggregate(mu, a, z)
