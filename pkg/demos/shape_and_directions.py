"""Shape function and critical directions for a few rate environments.

Run with ``python3 demos/shape_and_directions.py``.
"""
import numpy as np

from icgm import cli, shape
from icgm.environment import Environment, homogeneous

# rates 1/2 everywhere except 1/4 on the dyadic sites of both axes
fig2 = Environment.from_dict(cli.load_config("fig2.json")["environment"])
crit = shape.critical_dirs(fig2, (0, 0))
print("critical directions at the origin:", crit.c1.xi1, crit.c2.xi1)

# outside [c1, c2] the shape is linear; inside it is strictly concave
for xi1 in np.linspace(0, 1, 11):
    rep = shape.chi_min(fig2, (0, 0), xi1)
    flat = rep.at_lower_endpoint or rep.at_upper_endpoint
    print(f"xi1={xi1:.1f}  g={rep.gamma:.5f}  chi={rep.chi:+.5f}  {'flat' if flat else ''}")

# the homogeneous case has no flat pieces
flat = homogeneous(0.5)
print("homogeneous critical directions:", shape.critical_dirs(flat, (1, 1)))

# a block environment whose critical geodesic wanders in [0.2, 0.4]
ex3 = Environment.from_dict(cli.load_config("ex33_3.json")["environment"])
print("c1 =", shape.critical_dirs(ex3, (1, 1)).c1.xi1,
      "limit interval:", shape.linear_limit_interval(ex3, (1, 1), "c1"))
