"""Inhomogeneity recipes, limit measures and the random weight field.

The weight at site (i, j) is ``tau[i, j] / (a[i] + b[j])`` where ``tau`` is a
unit exponential produced by a counter-based hash of (seed, i, j).  Rate
sequences are described by recipes with analytic tail infima.

Example
-------
>>> env = Environment(Explicit([1.0, 0.5], tail=1.0), Constant(1.0), seed=3)
>>> env.a.tail_inf(1), env.a.running_min(1, 3)
(0.5, (0.5, 2))
"""
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from . import rng
from .errors import (
    ConfigError,
    DomainError,
    EmptyRangeError,
    InvalidEnvironment,
    WindowError,
)

# ---------------------------------------------------------------------------
# limit measures


@lru_cache(maxsize=8)
def _graded_nodes(lo, hi, nodes):
    """Composite Gauss-Legendre rule graded geometrically toward ``lo``.

    Integrands of the form f(t)/(t+z)^k are nearly singular at the lower end
    of the support when z is close to -lo, so panel widths halve toward it.
    """
    panels = max(1, min(32, nodes // 32))
    per = max(2, nodes // panels)
    x, w = np.polynomial.legendre.leggauss(per)
    length = hi - lo
    cuts = [lo + length * 2.0 ** -k for k in range(panels)] + [lo]
    cuts = cuts[::-1]
    pts, wts = [], []
    for left, right in zip(cuts[:-1], cuts[1:]):
        half = 0.5 * (right - left)
        pts.append(left + half * (x + 1.0))
        wts.append(half * w)
    return np.concatenate(pts), np.concatenate(wts)


class Measure:
    """Sub-probability measure on the real line (limit of a rate sequence)."""

    def mass(self):
        raise NotImplementedError

    def ess_inf(self):
        raise NotImplementedError

    def moment(self, z, order):
        raise NotImplementedError

    def cdf(self, t):
        raise NotImplementedError


@dataclass(frozen=True)
class Atomic(Measure):
    atoms: tuple

    def __post_init__(self):
        atoms = tuple((float(a), float(m)) for a, m in self.atoms if m > 0)
        object.__setattr__(self, "atoms", atoms)
        if not atoms:
            raise DomainError("measure must be non-zero")
        if self.mass() > 1 + 1e-12:
            raise DomainError(f"total mass {self.mass()} exceeds 1")

    def mass(self):
        return math.fsum(m for _, m in self.atoms)

    def ess_inf(self):
        return min(a for a, _ in self.atoms)

    def moment(self, z, order):
        total = 0.0
        for a, m in self.atoms:
            if a + z == 0:
                return math.inf
            total += m * (a + z) ** (-order)
        return total

    def cdf(self, t):
        return math.fsum(m for a, m in self.atoms if a <= t)

    def to_dict(self):
        return {"kind": "atomic", "atoms": [[a, m] for a, m in self.atoms]}


@dataclass(frozen=True)
class PowerDensity(Measure):
    """Density ``coef * (t - lo)**power`` on (lo, hi)."""

    lo: float
    hi: float
    coef: float
    power: float = 0.0
    nodes: int = 4096

    def __post_init__(self):
        if not (self.hi > self.lo and self.coef > 0 and self.power > -1):
            raise DomainError("density needs hi > lo, coef > 0, power > -1")
        if self.mass() > 1 + 1e-12:
            raise DomainError(f"total mass {self.mass()} exceeds 1")

    def mass(self):
        return self.coef * (self.hi - self.lo) ** (self.power + 1) / (self.power + 1)

    def ess_inf(self):
        return self.lo

    def moment(self, z, order):
        if z + self.lo == 0 and self.power - order <= -1:
            return math.inf
        t, w = _graded_nodes(float(self.lo), float(self.hi), int(self.nodes))
        vals = self.coef * (t - self.lo) ** self.power * (t + z) ** (-float(order))
        return float(np.dot(w, vals))

    def cdf(self, t):
        if t <= self.lo:
            return 0.0
        t = min(t, self.hi)
        return self.coef * (t - self.lo) ** (self.power + 1) / (self.power + 1)

    def quantile(self, u):
        """Inverse of the normalized cdf."""
        return self.lo + (self.hi - self.lo) * u ** (1.0 / (self.power + 1))

    def to_dict(self):
        return {"kind": "density", "lo": self.lo, "hi": self.hi, "coef": self.coef,
                "power": self.power, "nodes": self.nodes}


def measure_moment(mu, z, order):
    """Integral of (t + z)^(-order) against ``mu``; +inf when it diverges."""
    if order not in (1, 2):
        raise DomainError("order must be 1 or 2")
    if z < -mu.ess_inf():
        raise DomainError(f"z={z} below minus the essential infimum {mu.ess_inf()}")
    return mu.moment(z, order)


def measure_from_dict(d):
    kind = d.get("kind")
    if kind == "atomic":
        return Atomic(tuple(tuple(x) for x in d["atoms"]))
    if kind == "density":
        return PowerDensity(d["lo"], d["hi"], d["coef"], d.get("power", 0.0),
                            d.get("nodes", 4096))
    raise ConfigError(f"unknown measure kind {kind!r}", key="kind")


# ---------------------------------------------------------------------------
# rate sequences


class ParameterSequence:
    """Rate sequence defined by a recipe over an integer window.

    ``window`` is an inclusive pair (lo, hi); ``None`` means unbounded.
    """

    window = (None, None)

    def _check(self, i):
        lo, hi = self.window
        if (lo is not None and i < lo) or (hi is not None and i > hi):
            raise WindowError(f"index {i} outside window {self.window}")

    def at(self, i):
        i = int(i)
        self._check(i)
        return float(self._value(i))

    def values(self, lo, hi):
        """Rates at indices lo..hi inclusive."""
        lo, hi = int(lo), int(hi)
        if hi < lo:
            return np.empty(0)
        self._check(lo)
        self._check(hi)
        return self._values(lo, hi)

    def _values(self, lo, hi):
        return np.array([self._value(i) for i in range(lo, hi + 1)], dtype=float)

    def running_min(self, i, k):
        """(min of a_i..a_k, first index attaining it)."""
        if i > k:
            raise EmptyRangeError(f"empty range {i}..{k}")
        vals = self.values(i, k)
        pos = int(np.argmin(vals))
        return float(vals[pos]), i + pos

    def running_min_array(self, i, k):
        """Running minima a^min_{i:m} for m = i..k."""
        return np.minimum.accumulate(self.values(i, k))

    def tail_inf(self, i):
        raise NotImplementedError

    def inf_attained_at(self, i):
        """First index >= i where the tail infimum is attained, or None."""
        raise NotImplementedError

    def cesaro_bounds(self, i):
        """Analytic (limsup, liminf) of Cesaro means of (a_k - inf a_{i:})^-2.

        Returns None when the recipe declares nothing.
        """
        return None

    def limit_measure(self):
        raise NotImplementedError


@dataclass(frozen=True)
class Constant(ParameterSequence):
    value: float
    window: tuple = (None, None)

    def _value(self, i):
        return self.value

    def _values(self, lo, hi):
        return np.full(hi - lo + 1, float(self.value))

    def tail_inf(self, i):
        return float(self.value)

    def inf_attained_at(self, i):
        return int(i)

    def cesaro_bounds(self, i):
        return (math.inf, math.inf)

    def limit_measure(self):
        return Atomic(((self.value, 1.0),))

    def to_dict(self):
        return {"kind": "constant", "value": self.value, "window": list(self.window)}


@dataclass(frozen=True)
class Explicit(ParameterSequence):
    """Listed values at indices start, start+1, ... then a constant tail."""

    listed: tuple
    tail: float
    start: int = 1
    window: tuple = None

    def __init__(self, listed, tail, start=1, window=None):
        object.__setattr__(self, "listed", tuple(float(v) for v in listed))
        object.__setattr__(self, "tail", float(tail))
        object.__setattr__(self, "start", int(start))
        object.__setattr__(self, "window", tuple(window) if window else (int(start), None))

    def _value(self, i):
        pos = i - self.start
        if 0 <= pos < len(self.listed):
            return self.listed[pos]
        return self.tail

    def tail_inf(self, i):
        pos = max(0, int(i) - self.start)
        rest = self.listed[pos:]
        return min(min(rest), self.tail) if rest else self.tail

    def inf_attained_at(self, i):
        i = int(i)
        inf = self.tail_inf(i)
        first = max(i, self.start)
        for pos in range(first - self.start, len(self.listed)):
            if self.listed[pos] == inf:
                return self.start + pos
        return max(first, self.start + len(self.listed))

    def cesaro_bounds(self, i):
        return (math.inf, math.inf)

    def limit_measure(self):
        return Atomic(((self.tail, 1.0),))

    def to_dict(self):
        return {"kind": "explicit", "values": list(self.listed), "tail": self.tail,
                "start": self.start, "window": list(self.window)}


@dataclass(frozen=True)
class Periodic(ParameterSequence):
    period: tuple
    start: int = 1
    window: tuple = (None, None)

    def __post_init__(self):
        object.__setattr__(self, "period", tuple(float(v) for v in self.period))

    def _value(self, i):
        return self.period[(i - self.start) % len(self.period)]

    def tail_inf(self, i):
        return min(self.period)

    def inf_attained_at(self, i):
        i = int(i)
        m = min(self.period)
        for step in range(len(self.period)):
            if self._value(i + step) == m:
                return i + step
        raise AssertionError("unreachable")

    def cesaro_bounds(self, i):
        return (math.inf, math.inf)

    def limit_measure(self):
        p = len(self.period)
        counts = {}
        for v in self.period:
            counts[v] = counts.get(v, 0) + 1
        return Atomic(tuple((v, c / p) for v, c in sorted(counts.items())))

    def to_dict(self):
        return {"kind": "periodic", "values": list(self.period), "start": self.start,
                "window": list(self.window)}


@dataclass(frozen=True)
class Block(ParameterSequence):
    """Base rate with exceptional values on sparse blocks.

    Rules (``rule["kind"]``):

    ``geometric``   blocks t^k <= i < t^k + t^((1-2p)k), value sqrt(r) t^(-pk)
    ``square``      blocks k^2 <= i < k^2 + k^p, value sqrt(r/2) k^(-(1-p)/2)
    ``double_exp``  blocks 2^(k^2) <= i < 2^(k^2) + 2^((1-2p)k^2),
                    value sqrt(r) 2^(-p k^2)
    ``sparse``      single sites i = 2^k (k >= 0) carrying ``rule["value"]``

    The first three have tail infimum 0, never attained, and exceptional
    sets of density zero, so the limit measure is a point mass at the base.
    """

    base: float
    rule: dict = field(default_factory=dict)
    window: tuple = (1, None)

    def __hash__(self):
        return hash((self.base, tuple(sorted(self.rule.items())), self.window))

    def _blocks(self, lo, hi):
        """Yield (start, stop_exclusive, value) for blocks meeting [lo, hi]."""
        kind = self.rule["kind"]
        if kind == "sparse":
            k = 0
            while 2 ** k <= hi:
                if 2 ** k >= lo:
                    yield 2 ** k, 2 ** k + 1, self.rule["value"]
                k += 1
            return
        p, r = self.rule["p"], self.rule["r"]
        k = 1
        while True:
            if kind == "geometric":
                t = self.rule["t"]
                s = t ** k
                length = t ** ((1 - 2 * p) * k)
                val = math.sqrt(r) * t ** (-p * k)
            elif kind == "square":
                s = k * k
                length = k ** p
                val = math.sqrt(r / 2) * k ** (-(1 - p) / 2)
            elif kind == "double_exp":
                s = 2.0 ** (k * k)
                length = 2.0 ** ((1 - 2 * p) * k * k)
                val = math.sqrt(r) * 2.0 ** (-p * k * k)
            else:
                raise ConfigError(f"unknown block rule {kind!r}", key="rule")
            if s > hi:
                return
            first = math.ceil(s)
            stop = math.ceil(s + length)
            if stop > lo:
                yield first, stop, val
            k += 1

    def _value(self, i):
        for s, e, v in self._blocks(i, i):
            if s <= i < e:
                return v
        return self.base

    def _values(self, lo, hi):
        out = np.full(hi - lo + 1, float(self.base))
        for s, e, v in self._blocks(lo, hi):
            a, b = max(s, lo), min(e - 1, hi)
            if a <= b:
                out[a - lo:b - lo + 1] = v
        return out

    def tail_inf(self, i):
        if self.rule["kind"] == "sparse":
            return min(self.base, self.rule["value"])
        return 0.0

    def inf_attained_at(self, i):
        if self.rule["kind"] != "sparse":
            return None
        i = int(i)
        if self.base <= self.rule["value"]:
            k = i
            while self._value(k) != self.base:
                k += 1
            return k
        k = 1
        while k < i:
            k *= 2
        return k

    def cesaro_bounds(self, i):
        kind = self.rule["kind"]
        if kind == "sparse":
            return (math.inf, math.inf)
        base_term = self.base ** -2
        r = self.rule["r"]
        if kind == "geometric":
            t = self.rule["t"]
            return (base_term + t / (r * (t - 1)), base_term + 1 / (r * (t - 1)))
        if kind == "square":
            return (base_term + 1 / r, base_term + 1 / r)
        return (base_term + 1 / r, base_term)

    def limit_measure(self):
        return Atomic(((self.base, 1.0),))

    def to_dict(self):
        return {"kind": "block", "base": self.base, "rule": dict(self.rule),
                "window": list(self.window)}


def interval_block_rule(lo, hi, p=0.25):
    """Geometric block rule whose c1-side limit interval is [lo, hi].

    Assumes base rate 1 and a second sequence identically 1, so that the
    boundary constant equals 1.
    """
    if not 0 < lo < hi < 0.5:
        raise DomainError("need 0 < lo < hi < 1/2")
    r = 1.0 / (1.0 / lo - 1.0 / hi)
    t = (hi / lo) * (1 - 2 * lo) / (1 - 2 * hi)
    return {"kind": "geometric", "t": t, "p": p, "r": r}


@dataclass(frozen=True)
class IID(ParameterSequence):
    """Quenched iid rates drawn from a power density on (lo, hi).

    The draw uses its own seed and stream, independent of the weights.
    """

    lo: float
    hi: float
    power: float
    seed: int
    window: tuple = (None, None)

    def measure(self):
        coef = (self.power + 1) / (self.hi - self.lo) ** (self.power + 1)
        return PowerDensity(self.lo, self.hi, coef, self.power)

    def _values(self, lo, hi):
        key = rng.as_key(rng.stream_key(self.seed, "param-iid"))
        u = rng.uniform_line(key, lo, hi - lo + 1)
        return self.lo + (self.hi - self.lo) * u ** (1.0 / (self.power + 1))

    def _value(self, i):
        return float(self._values(i, i)[0])

    def tail_inf(self, i):
        return float(self.lo)

    def inf_attained_at(self, i):
        return None

    def cesaro_bounds(self, i):
        m = self.measure().moment(-self.lo, 2)
        return (m, m)

    def limit_measure(self):
        return self.measure()

    def to_dict(self):
        return {"kind": "iid", "distribution": {"kind": "power", "lo": self.lo,
                "hi": self.hi, "power": self.power}, "seed": self.seed,
                "window": list(self.window)}


def _window(d, default):
    w = d.get("window")
    return tuple(w) if w is not None else default


def sequence_from_dict(d):
    kind = d.get("kind")
    if kind == "constant":
        return Constant(float(d["value"]), _window(d, (None, None)))
    if kind == "explicit":
        return Explicit(d["values"], d["tail"], d.get("start", 1), d.get("window"))
    if kind == "periodic":
        return Periodic(tuple(d["values"]), d.get("start", 1), _window(d, (None, None)))
    if kind == "block":
        return Block(float(d["base"]), dict(d["rule"]), _window(d, (1, None)))
    if kind == "iid":
        dist = d["distribution"]
        if dist.get("kind", "power") != "power":
            raise ConfigError(f"unknown distribution {dist.get('kind')!r}", key="distribution")
        return IID(float(dist["lo"]), float(dist["hi"]), float(dist.get("power", 0.0)),
                   int(d["seed"]), _window(d, (None, None)))
    raise ConfigError(f"unknown recipe kind {kind!r}", key="kind")


def param_at(seq, i):
    return seq.at(i)


def running_min(seq, i, k):
    return seq.running_min(i, k)


def tail_inf(seq, i):
    return seq.tail_inf(i)


def estimate_cesaro(seq, i, horizon, inf=None):
    """Numerical (limsup, liminf) of Cesaro means over prefix lengths 2^k.

    The first quarter of the dyadic prefixes is discarded as burn-in.
    """
    if inf is None:
        inf = seq.tail_inf(i)
    vals = seq.values(i, i + horizon - 1)
    gaps = vals - inf
    if np.any(gaps <= 0):
        return (math.inf, math.inf)
    means = np.cumsum(gaps ** -2.0) / np.arange(1, horizon + 1)
    ks = [2 ** k for k in range(int(math.log2(horizon)) + 1)]
    ks = ks[len(ks) // 4:]
    picked = means[np.array(ks) - 1]
    return float(picked.max()), float(picked.min())


def vague_consistency(seq, mu, start=1, length=10000):
    """KS distance between a prefix's empirical law and the normalized ``mu``."""
    vals = np.sort(seq.values(start, start + length - 1))
    mass = mu.mass()
    pts = np.unique(np.concatenate([vals, [a for a, _ in getattr(mu, "atoms", ())]]))
    n = len(vals)
    worst = 0.0
    for t in pts:
        emp_right = np.searchsorted(vals, t, side="right") / n
        emp_left = np.searchsorted(vals, t, side="left") / n
        f_right = mu.cdf(t) / mass
        f_left = mu.cdf(np.nextafter(t, -np.inf)) / mass
        worst = max(worst, abs(emp_right - f_right), abs(emp_left - f_left))
    return worst


# ---------------------------------------------------------------------------
# environment


@dataclass(frozen=True)
class Environment:
    """Rate sequences, their limit measures and a seeded weight field.

    ``window`` is ((i_lo, j_lo), (i_hi, j_hi)) with ``None`` entries meaning
    unbounded; by default it is the product of the two sequence windows.
    """

    a: ParameterSequence
    b: ParameterSequence
    alpha: Measure = None
    beta: Measure = None
    seed: int = 0
    window: tuple = None

    def __post_init__(self):
        if self.alpha is None:
            object.__setattr__(self, "alpha", self.a.limit_measure())
        if self.beta is None:
            object.__setattr__(self, "beta", self.b.limit_measure())
        if self.window is None:
            w = ((self.a.window[0], self.b.window[0]), (self.a.window[1], self.b.window[1]))
            object.__setattr__(self, "window", w)
        else:
            object.__setattr__(self, "window", tuple(tuple(c) for c in self.window))
        object.__setattr__(self, "seed", int(self.seed) & rng.MASK64)
        (ilo, jlo), (ihi, jhi) = self.window
        for i in {ilo if ilo is not None else 0, ihi if ihi is not None else 0}:
            for j in {jlo if jlo is not None else 0, jhi if jhi is not None else 0}:
                if self.a.tail_inf(i) + self.b.tail_inf(j) <= 0:
                    raise InvalidEnvironment(
                        f"inf a_{{{i}:}} + inf b_{{{j}:}} <= 0")

    def with_seed(self, seed):
        return replace(self, seed=int(seed) & rng.MASK64)

    def in_window(self, i, j):
        (ilo, jlo), (ihi, jhi) = self.window
        return ((ilo is None or i >= ilo) and (ihi is None or i <= ihi)
                and (jlo is None or j >= jlo) and (jhi is None or j <= jhi))

    def _check_site(self, i, j):
        if not self.in_window(i, j):
            raise WindowError(f"site {(i, j)} outside window {self.window}")

    def rates(self, lo, hi):
        """Matrix of a_i + b_j over the rectangle [lo, hi]."""
        self._check_site(*lo)
        self._check_site(*hi)
        r = self.a.values(lo[0], hi[0])[:, None] + self.b.values(lo[1], hi[1])[None, :]
        if r.size and r.min() <= 0:
            raise InvalidEnvironment("nonpositive rate a_i + b_j in rectangle")
        return r

    def weight_key(self):
        return rng.as_key(rng.stream_key(self.seed, "bulk"))

    def weights(self, lo, hi):
        """Weights omega over the rectangle [lo, hi] as an array [i - lo0, j - lo1]."""
        rates = self.rates(lo, hi)
        tau = rng.exp_block(self.weight_key(), lo[0], lo[1], rates.shape[0], rates.shape[1])
        return tau / rates

    def sample_weight(self, site):
        i, j = int(site[0]), int(site[1])
        return float(self.weights((i, j), (i, j))[0, 0])

    def to_dict(self):
        return {"a": self.a.to_dict(), "b": self.b.to_dict(), "alpha": self.alpha.to_dict(),
                "beta": self.beta.to_dict(), "seed": self.seed,
                "window": [list(self.window[0]), list(self.window[1])]}

    @classmethod
    def from_dict(cls, d):
        allowed = {"a", "b", "alpha", "beta", "seed", "window"}
        unknown = set(d) - allowed
        if unknown:
            key = sorted(unknown)[0]
            raise ConfigError(f"unknown environment key {key!r}", key=key)
        for key in ("a", "b"):
            if key not in d:
                raise ConfigError(f"missing environment key {key!r}", key=key)
        a = sequence_from_dict(d["a"])
        b = sequence_from_dict(d["b"])
        alpha = measure_from_dict(d["alpha"]) if d.get("alpha") else None
        beta = measure_from_dict(d["beta"]) if d.get("beta") else None
        return cls(a, b, alpha, beta, int(d.get("seed", 0)), d.get("window"))


def sample_weight(env, site):
    return env.sample_weight(site)


def homogeneous(rate_a=0.5, rate_b=0.5, seed=0):
    """Environment with constant rates."""
    return Environment(Constant(rate_a), Constant(rate_b), seed=seed)
