"""Competition interface and the laws of its limits.

The interface rooted at x is a dual-lattice path started at x + (1/2, 1/2).
It is stored by its integer sites p (dual point p + (1/2, 1/2)); from p it
steps e1 when G(x, p + e1) < G(x, p + e2) and e2 otherwise.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from . import rng
from .errors import DomainError
from .lpp import LatticePath
from .shape import as_direction, chi_min


@dataclass(frozen=True, eq=False)
class CompetitionInterface:
    base: tuple
    path: LatticePath
    U: dict = field(default_factory=dict)
    V: dict = field(default_factory=dict)

    @property
    def ties(self):
        return self.path.ties


def _crossings(cells, base):
    """U(n) = min column on row n, V(m) = min row on column m, for n, m past x."""
    U, V = {}, {}
    for i, j in cells:
        i, j = int(i), int(j)
        if j > base[1] and j not in U:
            U[j] = i
        if i > base[0] and i not in V:
            V[i] = j
    return U, V


def competition_interface(env, x, horizon, box=None):
    """Interface from x for ``horizon`` steps (fewer if it meets the box edge).

    The default box holds every site within ``horizon + 1`` steps of x.
    """
    if horizon < 1:
        raise DomainError("horizon must be at least 1")
    x = (int(x[0]), int(x[1]))
    w1, w2 = box or (horizon + 2, horizon + 2)
    hi = (x[0] + w1 - 1, x[1] + w2 - 1)
    g = K.forward_passage(env.weights(x, hi))
    cells, ties = K.trace_interface(g, horizon)
    sites = cells + np.array(x)
    U, V = _crossings(sites, x)
    return CompetitionInterface(x, LatticePath("dual", sites, int(ties)), U, V)


def u_from_tree(env, x, n, columns):
    """sup{m : L(x + e2, (m, n)) > L(x + e1, (m, n))} over m < x1 + columns.

    Computed from two extra DP passes based at x + e1 and x + e2; returns
    None when every column of the window satisfies the inequality.
    """
    i, j = x
    hi = (i + columns - 1, n)
    g1 = K.forward_passage(env.weights((i + 1, j), hi))
    g2 = K.forward_passage(env.weights((i, j + 1), hi))
    best = None
    for m in range(i, i + columns):
        from_e2 = g2[m - i, n - j - 1]
        from_e1 = g1[m - i - 1, n - j] if m > i else -math.inf
        if from_e2 > from_e1:
            best = m
    if best == i + columns - 1:
        return None
    return best


def cif_atom_distribution(env, x, mode="U", m_range=None):
    """Exact law of U(inf) (or V(inf)) at x.

    Keys are integers m in ``m_range`` (default up to where the running
    minimum reaches the tail infimum, capped at 1000 past x), ``inf`` for
    the escaping mass, and ``"beyond"`` for finite atoms past the range.
    """
    i, j = x
    ai, bj = env.a.at(i), env.b.at(j)
    seq, start = (env.a, i) if mode == "U" else (env.b, j)
    if mode not in ("U", "V"):
        raise DomainError(f"unknown mode {mode!r}")
    tinf = seq.tail_inf(start)
    if m_range is None:
        at = seq.inf_attained_at(start)
        last = start + 1000 if at is None else min(at, start + 1000)
        m_range = (start, last)
    lo, hi = m_range
    mins = seq.running_min_array(start, hi + 1)
    total = ai + bj
    pmf = {}
    for m in range(lo, hi + 1):
        pmf[m] = float((mins[m - start] - mins[m - start + 1]) / total)
    pmf[math.inf] = float((tinf + (bj if mode == "U" else ai)) / total)
    beyond = float((mins[hi + 1 - start] - tinf) / total)
    if beyond > 0:
        pmf["beyond"] = beyond
    return pmf


def cif_direction_atoms(env, x):
    """(P(direction = e2), P(direction = e1))."""
    i, j = x
    ai, bj = env.a.at(i), env.b.at(j)
    return ((ai - env.a.tail_inf(i)) / (ai + bj), (bj - env.b.tail_inf(j)) / (ai + bj))


def cif_direction_cdf(env, x, xi):
    """P(limit direction of the interface <= xi) for xi in [e2, e1)."""
    xi = as_direction(xi)
    if xi.xi1 >= 1.0:
        raise DomainError("xi must lie in [e2, e1)")
    i, j = x
    ai, bj = env.a.at(i), env.b.at(j)
    return (ai + chi_min(env, x, xi).chi) / (ai + bj)


def _first_on_row(cells, row):
    hit = np.nonzero(cells[:, 1] == row)[0]
    return int(cells[hit[0], 0]) if hit.size else None


def mc_cif_distribution(env, x, horizon, replicas, m_max=None, start=0,
                        direction_steps=None):
    """Monte Carlo law of U(horizon) and, optionally, of the direction ratio.

    U(horizon) is evaluated on row ``horizon`` using a box of columns up to
    ``m_max + 1``; larger values are censored into ``"beyond"``.  With
    ``direction_steps`` an extra square box is used to record the fraction
    of e1 steps among the first ``direction_steps`` interface steps.
    """
    i, j = x
    if horizon <= j:
        raise DomainError("horizon row must lie above the base")
    if m_max is None:
        m_max = i + 20
    stab_row = j + max(1, math.ceil(0.75 * (horizon - j)))
    counts = {}
    stabilized = 0
    dichotomy_violations = 0
    ratios = []
    mins = env.a.running_min_array(i, m_max + 1)
    drops = {m for m in range(i, m_max + 1) if mins[m + 1 - i] < mins[m - i]}
    hi = (m_max + 1, horizon + 1)
    for r in range(start, start + replicas):
        rep = env.with_seed(rng.derive_seed(env.seed, "replica", r))
        g = K.forward_passage(rep.weights(x, hi))
        cells, _ = K.trace_interface(g, (hi[0] - i) + (hi[1] - j))
        cells = cells + np.array(x)
        u = _first_on_row(cells, horizon)
        key = u if u is not None and u <= m_max else "beyond"
        counts[key] = counts.get(key, 0) + 1
        u_early = _first_on_row(cells, stab_row)
        if u is not None and u_early == u:
            stabilized += 1
            if u < (horizon - j) / 4 and u not in drops:
                dichotomy_violations += 1
        if direction_steps:
            box = (direction_steps + 2, direction_steps + 2)
            ci = competition_interface(rep, x, direction_steps, box)
            steps = len(ci.path) - 1
            ratios.append(float((ci.path.sites[-1, 0] - i) / steps))
    out = {"counts": counts, "replicas": replicas, "horizon": horizon, "m_max": m_max,
           "stabilized_fraction": stabilized / replicas,
           "dichotomy_violations": dichotomy_violations}
    if direction_steps:
        out["direction_ratios"] = ratios
    return out
