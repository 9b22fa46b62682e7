"""Busemann increments on a thin column and geodesics that get stuck there.

Column rates are (1, 0.5, 1, 1, ...) and row rates are 1.  The slow
column 2 acts as a trap for every column-(k, inf) geodesic with k >= 2.
"""
import numpy as np

from icgm import busemann as B
from icgm.environment import Constant, Environment, Explicit
from icgm.stats import exp_cdf, ks_distance

env = Environment(Explicit([1.0, 0.5], 1.0), Constant(1.0), seed=3)
x = (1, 1)

rates = B.busemann_rates(env, x, B.BusemannIndex.column(2))
print("exact rates (horizontal, vertical):", rates)

hor, ver = B.thin_samples(env, x, ("column", 2), horizon=1000, replicas=2000)
print("KS horizontal:", round(ks_distance(hor, exp_cdf(rates[0])), 4))
print("KS vertical:  ", round(ks_distance(ver, exp_cdf(rates[1])), 4))

# how often the column-2 geodesic sits on column 2 after 500 steps
print("trapped fraction:", B.trapping_frequency(env, x, 2, 500, 200))

path = B.busemann_geodesic(env, x, B.BusemannIndex.column(2), 40)
print("first steps:", path.sites[:12].tolist())

# a finite target in column 3 pulls the path off column 2 near the top,
# the exact box sampler has no top and stays in the trap
path = B.busemann_geodesic(env, x, B.BusemannIndex.column(3), 300, method="stationary")
print("columns visited by the exact sample:", sorted(set(path.sites[:, 0].tolist())))

# homogeneous comparison: geodesics in direction (1/2, 1/2) merge
# (finite targets pin the endpoint, so aim past the horizon)
homog = Environment(Constant(0.5), Constant(0.5), seed=1)
print("coalesced:", B.coalescence_check(homog, (1, 1), (3, 1), 0.5, 300, 40,
                                         horizons=[50, 100, 300]))
print("mean end direction:", np.mean([
    B.busemann_geodesic(homog.with_seed(s), (1, 1), B.BusemannIndex.direction(0.5), 400,
                        target_horizon=800).sites[-1, 0] / 402 for s in range(50)]))
