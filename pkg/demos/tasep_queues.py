"""TASEP from the step state, the second-class particle, and the queue view.

The same exponential weights drive last-passage times and particle swaps,
so the swap time of hole i and particle j is exactly G((1, 1), (i, j)).
"""
import numpy as np

from icgm import competition as C
from icgm import lpp
from icgm import particles as P
from icgm.environment import Constant, Environment, Explicit

env = Environment(Explicit([1.0, 0.5], 1.0), Constant(1.0), seed=8)

T = P.rost_swap_times(env, 20)
G = lpp.passage_times(lpp.WeightField.from_env(env, lpp.Rect((1, 1), (20, 20)))).G
print("max |T - G| on 20x20:", np.abs(T - G).max())

state = P.simulate_tasep(env, 20)
star = P.star_pair_trajectory(state)
ci = C.competition_interface(env, (1, 1), 60, box=(20, 20))
n = int(np.searchsorted(star.times, star.horizon, side="right"))
print("star pair equals interface for", n, "steps:",
      np.array_equal(star.sites()[:n], ci.path.sites[:n]))
for t in (0.0, 1.0, 3.0, 6.0):
    if t <= star.horizon:
        print(f"t={t}: pair {star.at(t)}, second class particle at {P.second_class_position(star, t)}")

# queues: a = 0 and service rates (1, 0.5, 1, ...)
queues = Environment(Constant(0.0), Explicit([1.0, 0.5], 1.0), seed=5)
zrp = P.simulate_zrp(queues, 40, 10.0)
print("queue lengths at t=5:", zrp.queues_at(5.0)[:10], "customer at station", zrp.Z(5.0))
print("exact final station law:", P.z_limit_distribution(queues))
out = P.zrp_dichotomy(queues, 100.0, 1000)
print("stuck at station 2:", out["stabilized_at_2"], "ambiguous:", out["ambiguous_fraction"])
