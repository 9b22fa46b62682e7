"""Busemann increments, Busemann geodesics and their diagnostics.

Two routes are offered.

``finite``
    Increments toward a far target (k, j + N), (i + N, l) or x + N xi, from
    one reflected DP.  This is the pre-limit quantity; thin-rectangle values
    are monotone in N.

``stationary``
    An exact sample of the Busemann field inside a box.  Along the north
    row and east column of a box the limiting increments are independent
    exponentials (rates a_i + z and b_j - z), so drawing those and running
    the increment recursion backward through the bulk weights yields the
    Busemann field in the box with the correct joint law.  The parameter z
    is chi(xi) in the concave region, minus the tail infimum of a on the
    flat side near e2, and minus the running minimum for a thin column.
"""
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from . import rng
from .errors import ContractError, DomainError
from .lpp import LatticePath, Rect, initial_increments
from .shape import as_direction, chi_min


@dataclass(frozen=True)
class BusemannIndex:
    variant: str
    xi1: float = None
    k: int = None
    l: int = None
    sign: str = "+"

    @classmethod
    def column(cls, k):
        return cls("column", k=int(k))

    @classmethod
    def row(cls, l):
        return cls("row", l=int(l))

    @classmethod
    def direction(cls, xi, sign="+"):
        return cls("direction", xi1=as_direction(xi).xi1, sign=sign)

    def tie_e1(self):
        """Ties go toward e1 for rows and xi+, toward e2 for columns and xi-."""
        if self.variant == "row":
            return True
        if self.variant == "column":
            return False
        return self.sign == "+"

    def check(self, x):
        if self.variant == "column" and self.k < x[0]:
            raise DomainError("column index left of base")
        if self.variant == "row" and self.l < x[1]:
            raise DomainError("row index below base")


@dataclass(frozen=True)
class BusemannEstimate:
    edge: str
    x: tuple
    horizon: int
    value: float
    rate: float
    stable: bool = None

    def to_dict(self):
        return {"edge": self.edge, "x": list(self.x), "horizon": self.horizon,
                "value": self.value, "oracle_rate": self.rate, "stable": self.stable}


def _index(axis):
    if isinstance(axis, BusemannIndex):
        return axis
    kind, val = axis
    return BusemannIndex.column(val) if kind == "column" else BusemannIndex.row(val)


def busemann_rates(env, x, index):
    """Exact exponential rates (horizontal, vertical) of the limit at edge x."""
    i, j = x
    ai, bj = env.a.at(i), env.b.at(j)
    if index.variant == "column":
        m, _ = env.a.running_min(i, index.k)
        return ai - m, bj + m
    if index.variant == "row":
        m, _ = env.b.running_min(j, index.l)
        return ai + m, bj - m
    chi = chi_min(env, x, index.xi1).chi
    return ai + chi, bj - chi


def direction_target(x, xi1, n):
    """x + (round(n xi1), round(n xi2)), halves rounded toward e1."""
    t1 = math.floor(n * xi1 + 0.5)
    return (x[0] + t1, x[1] + n - t1)


def target_for(x, index, n):
    if index.variant == "column":
        return (index.k, x[1] + n)
    if index.variant == "row":
        return (x[0] + n, index.l)
    return direction_target(x, index.xi1, n)


def _increments_to(env, x, target):
    rect = Rect(x, target)
    return initial_increments(env.weights(rect.lo, rect.hi))


def thin_busemann(env, x, axis, horizon):
    """Thin-rectangle increments at x toward (k, j + n) or (i + n, l)."""
    index = _index(axis)
    index.check(x)
    if horizon < 1:
        raise DomainError("horizon must be at least 1")
    hr, vr = busemann_rates(env, x, index)
    if index.variant == "column" and index.k == x[0]:
        w = env.sample_weight(x)
        return (BusemannEstimate("hor", tuple(x), horizon, math.inf, hr, True),
                BusemannEstimate("ver", tuple(x), horizon, w, vr, True))
    if index.variant == "row" and index.l == x[1]:
        w = env.sample_weight(x)
        return (BusemannEstimate("hor", tuple(x), horizon, w, hr, True),
                BusemannEstimate("ver", tuple(x), horizon, math.inf, vr, True))
    inc_i, inc_j = _increments_to(env, x, target_for(x, index, horizon))
    return (BusemannEstimate("hor", tuple(x), horizon, float(inc_i[0, 0]), hr),
            BusemannEstimate("ver", tuple(x), horizon, float(inc_j[0, 0]), vr))


def directional_busemann(env, x, xi, horizon, check_stability=False):
    """Increments at x toward x + round(n xi).

    With ``check_stability`` the estimate is recomputed at 90% of the
    horizon and flagged stable when both edge values agree.
    """
    xi = as_direction(xi)
    index = BusemannIndex.direction(xi)
    hr, vr = busemann_rates(env, x, index)
    inc_i, inc_j = _increments_to(env, x, direction_target(x, xi.xi1, horizon))
    hor, ver = float(inc_i[0, 0]), float(inc_j[0, 0])
    stable = None
    if check_stability:
        n0 = max(1, int(0.9 * horizon))
        pi, pj = _increments_to(env, x, direction_target(x, xi.xi1, n0))
        stable = bool(abs(pi[0, 0] - hor) < 1e-12 and abs(pj[0, 0] - ver) < 1e-12)
    return (BusemannEstimate("hor", tuple(x), horizon, hor, hr, stable),
            BusemannEstimate("ver", tuple(x), horizon, ver, vr, stable))


# ---------------------------------------------------------------------------
# exact box sampler


def stationary_parameters(env, x, index):
    """(z, column limit, row limit) for the exact box sampler.

    The limits are the last usable column/row of the box (None = free):
    the boundary must sit on the first column (row) where the relevant
    minimum is attained, since there the horizontal (vertical) Busemann
    increment is infinite.
    """
    i, j = x
    if index.variant == "column":
        m, first = env.a.running_min(i, index.k)
        return -m, first - 1, None
    if index.variant == "row":
        m, first = env.b.running_min(j, index.l)
        return m, None, first - 1
    rep = chi_min(env, x, index.xi1)
    if rep.at_lower_endpoint:
        at = env.a.inf_attained_at(i)
        return rep.chi, (None if at is None else at - 1), None
    if rep.at_upper_endpoint:
        at = env.b.inf_attained_at(j)
        return rep.chi, None, (None if at is None else at - 1)
    return rep.chi, None, None


def _box(env, x, index, size):
    z, col_lim, row_lim = stationary_parameters(env, x, index)
    hi1 = x[0] + size[0] - 1
    hi2 = x[1] + size[1] - 1
    if col_lim is not None:
        hi1 = min(hi1, col_lim)
    if row_lim is not None:
        hi2 = min(hi2, row_lim)
    return z, (hi1, hi2), col_lim is not None and hi1 == col_lim, \
        row_lim is not None and hi2 == row_lim


def _boundary(env, x, hi, z, index):
    key = rng.as_key(rng.stream_key(env.seed, "busemann-boundary", index.variant,
                                    repr(float(z)), hi[0], hi[1]))
    a = env.a.values(x[0], hi[0])
    b = env.b.values(x[1], hi[1])
    north = K.exp_line(key, x[0], hi[1] + 1, 1, 0, len(a), a + z)
    east = K.exp_line(key, hi[0] + 1, x[1], 0, 1, len(b), b - z)
    return a, b, north, east


def stationary_busemann(env, x, index, size):
    """Exact Busemann increments on the box [x, x + size - 1] (clipped).

    Returns (hor, ver, box_hi).  Arrays are indexed [i - x1, j - x2].
    """
    z, hi, _, _ = _box(env, x, index, size)
    if hi[0] < x[0] or hi[1] < x[1]:
        raise ContractError("box is empty: base sits on the trapping line")
    a, b, north, east = _boundary(env, x, hi, z, index)
    env.rates(x, hi)
    hor, ver = K.ne_busemann_field(env.weight_key(), x[0], x[1], a, b, north, east)
    return hor, ver, hi


def _straight(x, steps, e1):
    k = np.arange(steps + 1)
    if e1:
        return np.stack([x[0] + k, np.full_like(k, x[1])], axis=1)
    return np.stack([np.full_like(k, x[0]), x[1] + k], axis=1)


def busemann_geodesic(env, x, index, horizon, method="finite", target_horizon=None,
                      box=None):
    """Path of ``horizon`` steps from x following the smaller increment.

    ``finite``: increments toward the target at ``target_horizon`` (default
    ``horizon``).  ``stationary``: exact Busemann sample on a box (default
    size horizon x horizon, or ``box=(columns, rows)``); if the path meets a
    trapping boundary it continues straight along it, and if it leaves a
    free side of the box it is returned truncated.
    """
    index.check(x)
    x = (int(x[0]), int(x[1]))
    tie_e1 = index.tie_e1()
    if method == "finite":
        n = target_horizon or horizon
        target = target_for(x, index, n)
        if index.variant == "column" and index.k == x[0]:
            return LatticePath("up-right", _straight(x, horizon, False))
        if index.variant == "row" and index.l == x[1]:
            return LatticePath("up-right", _straight(x, horizon, True))
        inc_i, inc_j = _increments_to(env, x, target)
        cells, ties = K.trace_min_increment(inc_i, inc_j, 0, 0, horizon, tie_e1)
        return LatticePath("up-right", cells + np.array(x), int(ties))
    if method != "stationary":
        raise ContractError(f"unknown method {method!r}")
    size = box or (horizon + 1, horizon + 1)
    z, hi, col_trap, row_trap = _box(env, x, index, size)
    if hi[0] < x[0]:
        return LatticePath("up-right", _straight(x, horizon, False))
    if hi[1] < x[1]:
        return LatticePath("up-right", _straight(x, horizon, True))
    a, b, north, east = _boundary(env, x, hi, z, index)
    env.rates(x, hi)
    bits, ties = K.ne_busemann_bits(env.weight_key(), x[0], x[1], a, b, north, east, tie_e1)
    n1 = hi[0] - x[0] + 1
    cells = K.trace_bits(bits, n1, 0, 0, horizon)
    sites = cells + np.array(x)
    steps = len(sites) - 1
    if steps < horizon:
        last = sites[-1]
        if col_trap and last[0] == hi[0] + 1:
            rest = _straight(tuple(last), horizon - steps, False)[1:]
            sites = np.concatenate([sites, rest])
        elif row_trap and last[1] == hi[1] + 1:
            rest = _straight(tuple(last), horizon - steps, True)[1:]
            sites = np.concatenate([sites, rest])
    return LatticePath("up-right", sites, int(ties))


# ---------------------------------------------------------------------------
# diagnostics


def trapping_diagnostic(env, x, k, horizon, method="finite"):
    """Is the column-(k, inf) geodesic on the trapping column at the end?"""
    _, trap = env.a.running_min(x[0], k)
    path = busemann_geodesic(env, x, BusemannIndex.column(k), horizon, method=method)
    cols = path.sites[:, 0]
    hits = np.nonzero(cols == trap)[0]
    return {"reached": bool(cols[-1] == trap), "trap_column": int(trap),
            "first_hit": int(hits[0]) if hits.size else None}


def _meet_level(p, q):
    """First level from which two up-right paths agree to their common end."""
    lp, lq = p.start_level, q.start_level
    lo = max(lp, lq)
    hi = min(lp + len(p) - 1, lq + len(q) - 1)
    if hi < lo:
        return None
    a = p.sites[lo - lp:hi - lp + 1]
    b = q.sites[lo - lq:hi - lq + 1]
    same = np.all(a == b, axis=1)
    if not same[-1]:
        return None
    bad = np.nonzero(~same)[0]
    return lo + (int(bad[-1]) + 1 if bad.size else 0)


def coalescence_levels(env, x, y, xi, horizon, method="finite", target_factor=2):
    """Level from which the two xi-geodesics from x and y share all sites.

    Both geodesics use one increment field: toward the common target
    (x ^ y) + round(target_factor * horizon * xi) for ``finite``, or one
    exact box sample for ``stationary``.  Paths run up to level
    level(x ^ y) + horizon.  Returns None if they have not merged.
    """
    xi = as_direction(xi)
    m = (min(x[0], y[0]), min(x[1], y[1]))
    top = m[0] + m[1] + horizon
    index = BusemannIndex.direction(xi)
    if method == "finite":
        target = direction_target(m, xi.xi1, int(target_factor * horizon))
        inc_i, inc_j = _increments_to(env, m, target)
    else:
        inc_i, inc_j, _ = stationary_busemann(env, m, index, (horizon + 2, horizon + 2))
    paths = []
    for s in (x, y):
        steps = top - (s[0] + s[1])
        cells, _ = K.trace_min_increment(inc_i, inc_j, s[0] - m[0], s[1] - m[1], steps,
                                         index.tie_e1())
        paths.append(LatticePath("up-right", cells + np.array(m)))
    return _meet_level(*paths), paths


def coalescence_check(env, x, y, xi, horizon, replicas, horizons=None, start=0,
                      method="finite", target_factor=2):
    """Fraction of replicas whose geodesics from x and y have merged.

    With ``horizons`` (a list of levels <= horizon measured like ``horizon``)
    a dict {h: fraction} is returned; one increment field per replica is
    shared by all windows, so the fractions are nondecreasing in h.
    """
    if tuple(x) == tuple(y):
        return 1.0 if horizons is None else {h: 1.0 for h in horizons}
    base = min(x[0], y[0]) + min(x[1], y[1])
    checks = [horizon] if horizons is None else list(horizons)
    merged = {h: 0 for h in checks}
    for r in range(start, start + replicas):
        rep = env.with_seed(rng.derive_seed(env.seed, "replica", r))
        level, _ = coalescence_levels(rep, x, y, xi, horizon, method, target_factor)
        for h in checks:
            if level is not None and level <= base + h:
                merged[h] += 1
    frac = {h: merged[h] / replicas for h in checks}
    return frac[horizon] if horizons is None else frac


def direction_statistics(path, window):
    """min / max / mean of pi_n . e1 / n over levels n in the window."""
    lo, hi = window
    levels = path.levels()
    sel = (levels >= lo) & (levels <= hi)
    if not sel.any() or levels[-1] < hi or levels[0] > lo:
        raise DomainError(f"window {window} not inside path levels "
                          f"[{levels[0]}, {levels[-1]}]")
    ratios = path.sites[sel, 0] / levels[sel]
    return {"min": float(ratios.min()), "max": float(ratios.max()),
            "mean": float(ratios.mean()), "count": int(sel.sum())}


def geodesics_ordered(paths):
    """True if, level by level, the e1-coordinates are weakly increasing."""
    start = max(p.start_level for p in paths)
    end = min(p.start_level + len(p) - 1 for p in paths)
    cols = [p.sites[start - p.start_level:end - p.start_level + 1, 0] for p in paths]
    return all(np.all(c1 <= c2) for c1, c2 in zip(cols[:-1], cols[1:]))


# ---------------------------------------------------------------------------
# Monte Carlo samplers


def thin_samples(env, x, axis, horizon, replicas, start=0):
    """Arrays (hor, ver) of thin-rectangle estimates over replicas."""
    hor = np.empty(replicas)
    ver = np.empty(replicas)
    for n, r in enumerate(range(start, start + replicas)):
        rep = env.with_seed(rng.derive_seed(env.seed, "replica", r))
        h, v = thin_busemann(rep, x, axis, horizon)
        hor[n], ver[n] = h.value, v.value
    return hor, ver


def directional_samples(env, x, xi, horizon, replicas, start=0):
    hor = np.empty(replicas)
    ver = np.empty(replicas)
    for n, r in enumerate(range(start, start + replicas)):
        rep = env.with_seed(rng.derive_seed(env.seed, "replica", r))
        h, v = directional_busemann(rep, x, xi, horizon)
        hor[n], ver[n] = h.value, v.value
    return hor, ver


def trapping_frequency(env, x, k, horizon, replicas, start=0, method="finite"):
    hits = 0
    for r in range(start, start + replicas):
        rep = env.with_seed(rng.derive_seed(env.seed, "replica", r))
        hits += trapping_diagnostic(rep, x, k, horizon, method)["reached"]
    return hits / replicas
