"""Increment-stationary boundary models and the Burke property harness.

South-west model on Rect(u - e1 - e2, v): zero corner, south row with
rates a_i + z, west column with rates b_j - z, bulk = environment weights.
North-east model on Rect(u, v + e1 + e2): north row a_i + z, east column
b_j - z, zero corner.  Boundary variates come from a stream keyed by
(seed, side, z), so models with different z share only the bulk.
"""
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from . import rng
from .environment import Environment, Explicit
from .errors import ParameterError, PathError
from .lpp import LatticePath, Rect, WeightField, dual_weights, initial_increments
from .stats import TestReport, exp_cdf, ks_distance, pairwise_corr


def admissible_interval(env, u, v):
    """Open interval of boundary parameters for the box [u, v]."""
    amin, _ = env.a.running_min(u[0], v[0])
    bmin, _ = env.b.running_min(u[1], v[1])
    return -amin, bmin


def boundary_key(seed, side, z):
    return rng.as_key(rng.stream_key(seed, "boundary", side, repr(float(z))))


@dataclass(frozen=True, eq=False)
class StationaryModel:
    env: Environment
    u: tuple
    v: tuple
    z: float
    side: str
    field: WeightField

    def boundary_rates(self):
        """(horizontal-row rates a_i + z, vertical-column rates b_j - z)."""
        a = self.env.a.values(self.u[0], self.v[0]) + self.z
        b = self.env.b.values(self.u[1], self.v[1]) - self.z
        return a, b


def build_stationary(env, u, v, z, side):
    u = (int(u[0]), int(u[1]))
    v = (int(v[0]), int(v[1]))
    lo, hi = admissible_interval(env, u, v)
    if not lo < z < hi:
        raise ParameterError(f"z={z} outside the open interval ({lo}, {hi})")
    a = env.a.values(u[0], v[0])
    b = env.b.values(u[1], v[1])
    n1, n2 = len(a), len(b)
    key = boundary_key(env.seed, side, z)
    bulk = env.weights(u, v)
    vals = np.zeros((n1 + 1, n2 + 1))
    if side == "SW":
        vals[1:, 1:] = bulk
        vals[1:, 0] = K.exp_line(key, u[0], u[1] - 1, 1, 0, n1, a + z)
        vals[0, 1:] = K.exp_line(key, u[0] - 1, u[1], 0, 1, n2, b - z)
        rect = Rect((u[0] - 1, u[1] - 1), v)
    elif side == "NE":
        vals[:-1, :-1] = bulk
        vals[:-1, -1] = K.exp_line(key, u[0], v[1] + 1, 1, 0, n1, a + z)
        vals[-1, :-1] = K.exp_line(key, v[0] + 1, u[1], 0, 1, n2, b - z)
        rect = Rect(u, (v[0] + 1, v[1] + 1))
    else:
        raise ParameterError(f"unknown side {side!r}")
    return StationaryModel(env, u, v, float(z), side, WeightField(rect, vals))


def _path_sets(path, rect):
    """Sites strictly below (G-) and strictly above (G+) a down-right path."""
    on = {tuple(map(int, p)) for p in path.sites}
    below, above = [], []
    n = max(rect.shape)
    for x in rect.sites():
        if x in on:
            continue
        if any((x[0] + k, x[1] + k) in on for k in range(1, n + 1)):
            below.append(x)
        elif any((x[0] - k, x[1] - k) in on for k in range(1, n + 1)):
            above.append(x)
    return below, above


def default_path(model):
    from .lpp import down_right_staircase

    u, v = model.u, model.v
    if model.side == "SW":
        return down_right_staircase((u[0] - 1, v[1]), (v[0], u[1] - 1))
    return down_right_staircase((u[0], v[1] + 1), (v[0] + 1, u[1]))


def _check_path(model, path):
    if path.kind != "down-right":
        raise PathError("Burke collections need a down-right path")
    start, end = tuple(path.sites[0]), tuple(path.sites[-1])
    u, v = model.u, model.v
    if model.side == "SW":
        want = ((u[0] - 1, v[1]), (v[0], u[1] - 1))
    else:
        want = ((u[0], v[1] + 1), (v[0] + 1, u[1]))
    if (start, end) != want:
        raise PathError(f"path must run from {want[0]} to {want[1]}")


def burke_increments(model, path=None, with_rates=False):
    """Increments along a down-right path plus dual and bulk weights.

    Returns a dict of lists keyed ``I``, ``J``, ``dual``, ``bulk``; each
    entry is (site, value) or, with ``with_rates``, (site, value, rate).
    For SW the increments are terminal ones from the zero corner; for NE
    they are initial ones toward the zero corner.
    """
    if path is None:
        path = default_path(model)
    _check_path(model, path)
    rect = model.field.rect
    vals = model.field.values
    a = model.env.a
    b = model.env.b
    z = model.z
    out = {"I": [], "J": [], "dual": [], "bulk": []}
    sites = [tuple(map(int, p)) for p in path.sites]
    below, above = _path_sets(path, rect)

    def idx(x):
        return rect.index(x)

    if model.side == "SW":
        inc_i, inc_j = K.terminal_increments(vals)
        dual = dual_weights(model.field).values
        for p, q in zip(sites[:-1], sites[1:]):
            if q[0] == p[0] + 1:
                out["I"].append((q, inc_i[idx(q)], a.at(q[0]) + z))
            else:
                out["J"].append((p, inc_j[idx(p)], b.at(p[1]) - z))
        for x in below:
            out["dual"].append((x, dual[idx(x)], a.at(x[0] + 1) + b.at(x[1] + 1)))
        for x in above:
            out["bulk"].append((x, vals[idx(x)], a.at(x[0]) + b.at(x[1])))
    else:
        inc_i, inc_j = initial_increments(vals)
        for p, q in zip(sites[:-1], sites[1:]):
            if q[0] == p[0] + 1:
                out["I"].append((p, inc_i[idx(p)], a.at(p[0]) + z))
            else:
                out["J"].append((q, inc_j[idx(q)], b.at(q[1]) - z))
        for x in above:
            d = min(inc_i[idx((x[0] - 1, x[1]))], inc_j[idx((x[0], x[1] - 1))])
            out["dual"].append((x, d, a.at(x[0] - 1) + b.at(x[1] - 1)))
        for x in below:
            out["bulk"].append((x, vals[idx(x)], a.at(x[0]) + b.at(x[1])))
    if not with_rates:
        out = {k: [(s, val) for s, val, _ in lst] for k, lst in out.items()}
    return out


def burke_test(env, u, v, z, side, path=None, replicas=10000, ks_threshold=0.02,
               corr_threshold=0.05, start=0):
    """Monte Carlo check of the Burke property over independent replicas."""
    names, rates, rows = None, None, []
    for r in range(start, start + replicas):
        rep = env.with_seed(rng.derive_seed(env.seed, "replica", r))
        coll = burke_increments(build_stationary(rep, u, v, z, side), path, with_rates=True)
        if names is None:
            names = [f"{k}{s}" for k in ("I", "J", "dual", "bulk") for s, _, _ in coll[k]]
            rates = [rt for k in ("I", "J", "dual", "bulk") for _, _, rt in coll[k]]
        rows.append([val for k in ("I", "J", "dual", "bulk") for _, val, _ in coll[k]])
    data = np.array(rows, dtype=float)
    return burke_report(names, rates, data, ks_threshold, corr_threshold)


def burke_report(names, rates, data, ks_threshold=0.02, corr_threshold=0.05, seed=0):
    n = data.shape[0]
    variables = []
    for k, name in enumerate(names):
        ks = ks_distance(data[:, k], exp_cdf(rates[k]))
        variables.append({"variable": name, "rate": rates[k], "ks": ks, "n": n})
    corr = pairwise_corr(list(data.T))
    off = np.abs(corr[~np.eye(len(names), dtype=bool)]) if len(names) > 1 else np.zeros(1)
    max_ks = max(v["ks"] for v in variables)
    max_corr = float(off.max())
    report = TestReport("burke_max_ks", max_ks, ks_threshold, None, n)
    report.extra = {"variables": variables, "max_abs_corr": max_corr,
                    "corr_threshold": corr_threshold,
                    "triple": triple_permutation(data, seed)}
    if n < 100:
        report.passed = None
        report.notes.append("insufficient power: fewer than 100 replicas")
    else:
        report.passed = bool(max_ks <= ks_threshold and max_corr <= corr_threshold)
    return report


def triple_permutation(data, seed=0, permutations=200):
    """Third mixed moment of a random standardized triple vs column shuffles."""
    n, m = data.shape
    if m < 3:
        return {}
    gen = np.random.default_rng(rng.derive_seed(seed, "triple"))
    cols = sorted(gen.choice(m, 3, replace=False).tolist())
    std = (data[:, cols] - data[:, cols].mean(0)) / data[:, cols].std(0)
    stat = abs(float(np.mean(std[:, 0] * std[:, 1] * std[:, 2])))
    null = []
    for _ in range(permutations):
        null.append(abs(float(np.mean(std[:, 0] * gen.permutation(std[:, 1])
                                      * gen.permutation(std[:, 2])))))
    return {"columns": cols, "statistic": stat, "null_max": max(null),
            "passed": bool(stat <= max(null) * 1.5)}


def reversed_environment(env, u, v, seed=None):
    """Environment with a and b reversed on [u, v] (a'_k = a_{u1 + v1 - k})."""
    a = env.a.values(u[0], v[0])[::-1]
    b = env.b.values(u[1], v[1])[::-1]
    ra = Explicit(a, float(a.min()), start=u[0], window=(u[0] - 1, None))
    rb = Explicit(b, float(b.min()), start=u[1], window=(u[1] - 1, None))
    return Environment(ra, rb, seed=env.seed if seed is None else seed)


def exit_north_frequency(env, u, v, z, replicas, start=0):
    """Fraction of NE replicas whose geodesic to the corner uses the north row.

    The event is G(u, v + e1 + e2) = G(u, v + e2): the last step into the
    zero-weight corner comes from the west.
    """
    hits = 0
    for r in range(start, start + replicas):
        rep = env.with_seed(rng.derive_seed(env.seed, "replica", r))
        m = build_stationary(rep, u, v, z, "NE")
        g = K.forward_passage(m.field.values)
        hits += g[-2, -1] >= g[-1, -2]
    return hits / replicas
