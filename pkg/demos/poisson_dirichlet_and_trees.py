"""Ranked Gibbs weights: Poisson-Dirichlet versus a branching random walk.

Compares the two PD(alpha, 0) samplers, then runs the binary branching random
walk at beta = 2 beta_c, whose cluster weights should approach PD(1/2): the
mean of sum w^2 drifts toward 1 - alpha = 0.5 as depth grows.
"""
import numpy as np

from glassy_chaos import cascade as cc
from glassy_chaos import limit_law as ll
from glassy_chaos import stats as st

alpha = 0.5
top_p, pr_p = ll.pd_ensemble(alpha, 4, 2000, seed=1, method="poisson")
top_s, pr_s = ll.pd_ensemble(alpha, 4, 2000, seed=2, method="stick")
print(f"E sum w^2: poisson {pr_p.mean():.4f}, stick-breaking {pr_s.mean():.4f}, exact {1 - alpha}")
print(f"mean top-4 weights (poisson): {np.round(top_p.mean(axis=0), 4)}")
print(f"KS distance of top weight: {st.ks_distance(top_p[:, 0], top_s[:, 0]):.4f} "
      f"(1% critical {st.ks_critical_value(2000, 2000):.4f})")

for depth in (6, 10, 14):
    out = cc.brw_ensemble(cc.BrwSpec(depth), 1000, seed=5)
    pr = out["participation"]
    print(f"BRW depth {depth:2d}: mean cluster sum w^2 = {pr.mean():.4f} +/- {pr.std() / np.sqrt(pr.size):.4f}, "
          f"max/n = {out['speed'].mean():.3f} (beta_c = {cc.BETA_C:.3f})")
