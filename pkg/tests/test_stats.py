import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as hs
from hypothesis.extra.numpy import arrays

from glassy_chaos import kernels as kn
from glassy_chaos import limit_law as ll
from glassy_chaos import stats as st


@settings(max_examples=30, deadline=None)
@given(x=arrays(np.float64, hs.integers(4, 60), elements=hs.floats(-1e3, 1e3)), cut=hs.integers(1, 3))
def test_running_stats_merge_matches_batch(x, cut):
    a = st.RunningStats().push(x[:cut]).merge(st.RunningStats().push(x[cut:]))
    assert a.mean == pytest.approx(x.mean(), abs=1e-9)
    assert a.variance == pytest.approx(x.var(ddof=1), rel=1e-7, abs=1e-7)


def test_mc_laplace_reports():
    r = st.mc_laplace(np.array([0.0, 1.0, 2.0]), [0.0, 1.0])
    assert r[0].estimate == 1.0 and r[0].stderr == 0.0
    assert r[1].estimate == pytest.approx(np.exp(-np.array([0.0, 1.0, 2.0])).mean())
    with pytest.raises(st.EstimationError):
        st.mc_laplace([], [1.0])


def test_hill_on_pareto():
    x = np.random.default_rng(0).pareto(0.5, 100000) + 1
    r = st.hill_estimator(x)
    assert r.method == f"hill[k={int(100000 ** (2 / 3))}]"
    assert abs(r.estimate - 0.5) < 4 * r.stderr
    with pytest.raises(st.EstimationError, match="zero spacing"):
        st.hill_estimator(np.ones(100))
    with pytest.raises(st.EstimationError):
        st.hill_estimator(np.array([1.0, -1.0, 2.0]))


def test_participation_and_ks():
    assert st.participation_ratio([0.5, 0.5]) == 0.5
    with pytest.raises(st.EstimationError):
        st.participation_ratio([0.5, 0.6])
    assert st.ks_distance([0, 1, 2], [0, 1, 2]) == 0.0
    assert st.ks_critical_value(100, 100) == pytest.approx(math.sqrt(-0.5 * math.log(0.005)) * math.sqrt(0.02))


def test_freezing_model_is_c1():
    g = np.array([math.sqrt(2) - 1e-9, math.sqrt(2) + 1e-9])
    s = st.freezing_slope_model(g, 1)
    assert s[0] == pytest.approx(s[1], abs=1e-8)
    assert st.freezing_slope_model([3.0], 1)[0] == pytest.approx(3 * math.sqrt(2) - 1)


def test_freezing_curve_recovers_exact_slopes():
    times = np.array([5.0, 6.0, 7.0, 8.0])
    gammas = (0.5, 1.0, 2.5)
    pred = st.freezing_slope_model(gammas, 1)
    lnz = np.empty((3, 3, 4))
    for i, g in enumerate(gammas):
        corr = 1.5 * g / math.sqrt(2) * np.log(times) if g > math.sqrt(2) else 0.0
        lnz[:, i, :] = pred[i] * times - corr + np.arange(3)[:, None]
    fit = st.freezing_curve(lnz, gammas, times, 1)
    np.testing.assert_allclose([r.estimate for r in fit.slopes], pred, atol=1e-12)
    assert fit.raw_slopes[2].estimate < pred[2]
    with pytest.raises(st.EstimationError):
        st.freezing_curve(lnz[:, :, :1], gammas, times[:1], 1)


def test_kink_fit_recovers_critical_point():
    g = np.linspace(0.25, 3.0, 12)
    assert st.kink_fit(g, st.freezing_slope_model(g, 1), 1) == pytest.approx(math.sqrt(2), abs=1e-4)


def test_direct_inversion_is_exact():
    c = kn.make_renorm_constants(2, 4.0)
    th = st.default_theta_grid()
    lap = ll.laplace_exact(th, 1.3, c, 0.7)
    assert st.invert_C_direct(th, lap, 0.7, c.alpha) == pytest.approx(1.3, abs=1e-12)


def test_estimate_C_self_consistency():
    c = kn.make_renorm_constants(2, 4.0)
    s = ll.sample_stable_totals(1.0, c, 1.0, 5000, seed=12)
    rep = st.estimate_C_gamma(s, np.ones(5000), c, n_boot=20)
    assert abs(rep.estimate - 1.0) < 0.1
    assert rep.stderr > 0


def test_estimate_C_non_identifiable():
    c = kn.make_renorm_constants(2, 4.0)
    s = np.ones(200)
    with pytest.raises(st.EstimationError, match="at least two points"):
        st.estimate_C_gamma(s, s, c, thetas=[1.0])
    with pytest.raises(st.EstimationError, match="flat objective"):
        st.estimate_C_gamma(s, np.zeros(200), c)
    with pytest.raises(st.EstimationError):
        st.estimate_C_gamma(s[:50], s[:50], c)


def test_reports_to_json_roundtrip():
    r = st.EstimatorReport("x", 1.0, 0.1, 10, "m")
    body = json.loads(st.reports_to_json([r], {"seed": 1}))
    assert body["header"] == {"seed": 1}
    assert body["reports"][0]["ci95"] == pytest.approx([0.804, 1.196])
