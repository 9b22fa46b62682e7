"""Competition interface from (1, 1): exact law of its limit versus simulation."""
import math

from icgm import competition as C
from icgm.environment import Constant, Environment, Explicit, homogeneous

env = Environment(Explicit([1.0, 0.5], 1.0), Constant(1.0), seed=3)

ci = C.competition_interface(env, (1, 1), 60)
print("interface sites:", ci.path.sites[:15].tolist(), "...")
print("U on rows 2..10:", [ci.U.get(n) for n in range(2, 11)])

pmf = C.cif_atom_distribution(env, (1, 1))
print("exact law of U(inf):", {k: round(v, 4) for k, v in pmf.items() if v})

mc = C.mc_cif_distribution(env, (1, 1), horizon=300, replicas=3000, m_max=4)
print("simulated U(300):", {k: v / 3000 for k, v in sorted(mc["counts"].items(), key=str)})
print("stabilized:", mc["stabilized_fraction"], "violations:", mc["dichotomy_violations"])

# in the homogeneous case the interface escapes and has a continuous direction
h = homogeneous(0.5, seed=4)
for xi1 in (0.1, 0.25, 0.5, 0.75, 0.9):
    print(f"P(direction <= {xi1}) = {C.cif_direction_cdf(h, (1, 1), xi1):.4f}")
print("P(U = inf) homogeneous:", C.cif_atom_distribution(h, (1, 1), m_range=(1, 5))[math.inf])
