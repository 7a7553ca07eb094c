import math

import numpy as np
import pytest

from glassy_chaos import fields as fl
from glassy_chaos import kernels as kn
from glassy_chaos import measures as ms


@pytest.fixture(scope="module")
def path():
    return fl.sample_paths(fl.GridSpec(1, 128), kn.triangle1d(), fl.TimeSchedule((1.0, 2.0, 4.0)), 64, seed=21)


def test_subcritical_total_matches_direct_sum(path):
    m = ms.subcritical_measure(path, 0.7, 2.0)
    direct = (np.exp(0.7 * path.at(2.0) - 0.5 * 0.49 * 2.0) * path.grid.cell_volume).sum(axis=1)
    np.testing.assert_allclose(m.total(), direct, rtol=1e-12)


def test_gamma_zero_is_lebesgue(path):
    np.testing.assert_allclose(ms.subcritical_measure(path, 0.0, 1.0).total(), 1.0)


def test_derivative_measure_signs(path):
    m = ms.derivative_measure(path, 1.0)
    X = path.at(1.0)
    expected = np.sign(math.sqrt(2) * 1.0 - X)
    assert np.all(m.sign[expected != 0] == expected[expected != 0])
    direct = ((math.sqrt(2) - X) * np.exp(math.sqrt(2) * X - 1.0) * path.grid.cell_volume).sum(axis=1)
    np.testing.assert_allclose(m.total(), direct, rtol=1e-10, atol=1e-12)


def test_seneta_heyde_scaling(path):
    sh = ms.seneta_heyde_measure(path, 4.0).total()
    crit = ms.subcritical_measure(path, math.sqrt(2), 4.0).total()
    np.testing.assert_allclose(sh, math.sqrt(4.0) * crit, rtol=1e-12)


def test_supercritical_requires_matching_constants(path):
    c = kn.make_renorm_constants(1, 2.5)
    m = ms.supercritical_measure(path, 2.5, 4.0, c)
    assert np.all(m.total() > 0)
    with pytest.raises(ValueError):
        ms.supercritical_measure(path, 3.0, 4.0, c)


def test_log_space_survives_huge_gamma(path):
    w = ms.gibbs_weights(ms.subcritical_measure(path, 400.0, 4.0))
    assert np.all(np.isfinite(w))
    np.testing.assert_allclose(w.sum(axis=1), 1.0)
    assert np.all(np.diff(w, axis=1) <= 0)


def test_top_weights_and_free_energy(path):
    m = ms.subcritical_measure(path, 2.5, 4.0)
    t1 = ms.top_weights(m, 1)
    np.testing.assert_allclose(t1, ms.gibbs_weights(m)[:, 0])
    assert np.all(ms.top_weights(m, 3) >= t1)
    with pytest.raises(ValueError):
        ms.free_energy(path, 1.0, 0.0)


def test_gibbs_rejects_signed_measure(path):
    m = ms.derivative_measure(path, 1.0)
    if np.any(m.sign < 0):
        with pytest.raises(ValueError):
            ms.gibbs_weights(m)


def test_integrate_indicator(path):
    m = ms.subcritical_measure(path, 0.5, 1.0)
    half = m.integrate(ms.indicator_box([0.0], [0.5]))
    assert np.all(half < m.total())
    np.testing.assert_allclose(m.integrate(lambda x: np.ones(x.shape[:-1])), m.total())


def test_barrier_diagnostic_range(path):
    b = ms.barrier_diagnostic(path, 2.0)
    assert np.all((b >= 0) & (b <= 1))
    with pytest.raises(ValueError):
        ms.barrier_diagnostic(path, 1.0)


def test_summary_rows_fields(path):
    rows = ms.summary_rows(path, (0.5, 2.5))
    assert all(len(r) == len(ms.SUMMARY_FIELDS) for r in rows)
    # 3 times x (2 gammas + derivative + Seneta-Heyde) x 64 replicas
    assert len(rows) == 3 * 4 * 64
    assert {r[3] for r in rows} >= {"subcritical", "supercritical_renorm", "critical_derivative"}
