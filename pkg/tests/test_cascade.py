import numpy as np
import pytest

from glassy_chaos import cascade as cc
from glassy_chaos.rng import stream


def test_leaf_energy_variance_is_depth():
    v = np.stack([cc.simulate_leaf_energies(cc.BrwSpec(5), stream(0, i)) for i in range(2000)])
    assert v.shape == (2000, 32)
    assert v.var() == pytest.approx(5.0, rel=0.05)


def test_siblings_share_ancestry():
    # leaves 0 and 1 share all but the last step: their covariance is depth - 1
    v = np.stack([cc.simulate_leaf_energies(cc.BrwSpec(4), stream(1, i)) for i in range(4000)])
    assert np.cov(v[:, 0], v[:, 1])[0, 1] == pytest.approx(3.0, abs=0.3)
    assert abs(np.cov(v[:, 0], v[:, 15])[0, 1]) < 0.3


def test_gibbs_and_cluster_weights():
    w = cc.brw_gibbs_weights(np.array([0.0, 1.0, 2.0, 3.0]), 1.0)
    assert w.sum() == pytest.approx(1.0)
    np.testing.assert_allclose(cc.cluster_weights(w, 1), [w[0] + w[1], w[2] + w[3]])
    with pytest.raises(ValueError):
        cc.brw_gibbs_weights(np.array([np.inf]), 1.0)


def test_spec_validation():
    with pytest.raises(ValueError):
        cc.BrwSpec(0)
    with pytest.raises(ValueError):
        cc.BrwSpec(23)


def test_ensemble_reproducible():
    a = cc.brw_ensemble(cc.BrwSpec(8), 5, seed=3)
    b = cc.brw_ensemble(cc.BrwSpec(8), 2, seed=3, first=3)
    np.testing.assert_array_equal(a["participation"][3:], b["participation"])
    assert np.all(a["top"][:, :-1] >= a["top"][:, 1:])
