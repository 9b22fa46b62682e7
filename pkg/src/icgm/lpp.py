"""Last-passage dynamic programming and the deterministic constructions.

Fields live on a rectangle ``Rect(lo, hi)`` and are stored as dense arrays
indexed ``[i - lo[0], j - lo[1]]``.  Increment arrays use ``inf`` where the
shifted point falls outside the ordered range.
"""
import csv
import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .errors import ContractError, PathError, SizeError

MAX_SITES = 10 ** 8
E1 = (1, 0)
E2 = (0, 1)


class _Unreachable:
    """Passage time between unordered points (the -inf convention)."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "UNREACHABLE"

    def __bool__(self):
        return False


UNREACHABLE = _Unreachable()


def leq(x, y):
    return x[0] <= y[0] and x[1] <= y[1]


@dataclass(frozen=True)
class Rect:
    lo: tuple
    hi: tuple

    def __post_init__(self):
        object.__setattr__(self, "lo", (int(self.lo[0]), int(self.lo[1])))
        object.__setattr__(self, "hi", (int(self.hi[0]), int(self.hi[1])))

    @property
    def shape(self):
        return (self.hi[0] - self.lo[0] + 1, self.hi[1] - self.lo[1] + 1)

    @property
    def size(self):
        n1, n2 = self.shape
        return max(n1, 0) * max(n2, 0)

    def empty(self):
        return not leq(self.lo, self.hi)

    def contains(self, x):
        return leq(self.lo, x) and leq(x, self.hi)

    def index(self, x):
        return (x[0] - self.lo[0], x[1] - self.lo[1])

    def sites(self):
        for i in range(self.lo[0], self.hi[0] + 1):
            for j in range(self.lo[1], self.hi[1] + 1):
                yield (i, j)


@dataclass(frozen=True, eq=False)
class WeightField:
    rect: Rect
    values: np.ndarray

    def __post_init__(self):
        vals = np.ascontiguousarray(self.values, dtype=float)
        if vals.shape != self.rect.shape:
            raise ContractError(f"values shape {vals.shape} != rect shape {self.rect.shape}")
        if not np.all(np.isfinite(vals)):
            raise ContractError("weights must be finite")
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_env(cls, env, rect):
        if not isinstance(rect, Rect):
            rect = Rect(*rect)
        if rect.size > MAX_SITES:
            raise SizeError(f"rectangle of {rect.size} sites exceeds {MAX_SITES}")
        return cls(rect, env.weights(rect.lo, rect.hi))

    def at(self, x):
        return float(self.values[self.rect.index(x)])

    def sub(self, lo, hi):
        """Restriction to the sub-rectangle [lo, hi]."""
        r = Rect(lo, hi)
        if not (self.rect.contains(r.lo) and self.rect.contains(r.hi)):
            raise ContractError(f"{r} not inside {self.rect}")
        a, b = self.rect.index(r.lo)
        c, d = self.rect.index(r.hi)
        return WeightField(r, self.values[a:c + 1, b:d + 1])


@dataclass(frozen=True, eq=False)
class PassageField:
    base: tuple
    rect: Rect
    G: np.ndarray
    weights: WeightField

    def at(self, y):
        if not leq(self.base, y):
            return UNREACHABLE
        return float(self.G[self.rect.index(y)])


@dataclass(frozen=True, eq=False)
class LatticePath:
    """Site sequence of kind ``up-right``, ``down-right`` or ``dual``.

    Dual paths store integer sites p; the dual-lattice point is p + (1/2, 1/2).
    """

    kind: str
    sites: np.ndarray
    ties: int = 0

    def __post_init__(self):
        s = np.asarray(self.sites, dtype=np.int64).reshape(-1, 2)
        object.__setattr__(self, "sites", s)
        steps = np.diff(s, axis=0)
        if self.kind in ("up-right", "dual"):
            ok = np.all((steps == (1, 0)).all(1) | (steps == (0, 1)).all(1))
        elif self.kind == "down-right":
            ok = np.all((steps == (1, 0)).all(1) | (steps == (0, -1)).all(1))
        else:
            raise PathError(f"unknown path kind {self.kind!r}")
        if not ok:
            raise PathError(f"steps do not match kind {self.kind}")

    def __len__(self):
        return len(self.sites)

    @property
    def tie_flag(self):
        return self.ties > 0

    @property
    def start_level(self):
        return int(self.sites[0].sum())

    def levels(self):
        return self.sites.sum(axis=1)

    def at_level(self, n):
        k = n - self.start_level
        if not 0 <= k < len(self.sites):
            raise PathError(f"level {n} not on path")
        return tuple(int(v) for v in self.sites[k])

    def weight_sum(self, w):
        idx = self.sites - np.array(w.rect.lo)
        return float(np.sum(w.values[idx[:, 0], idx[:, 1]]))

    def to_csv(self, fh):
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["n", "i", "j"])
        for (i, j) in self.sites:
            writer.writerow([int(i + j), int(i), int(j)])


def _as_field(w):
    if not isinstance(w, WeightField):
        raise ContractError("expected a WeightField")
    return w


def passage_times(w, x=None):
    """Passage times G(x, .) over the rectangle of ``w``; x must be its lower corner."""
    w = _as_field(w)
    if x is None:
        x = w.rect.lo
    if tuple(x) != w.rect.lo:
        raise ContractError(f"base {tuple(x)} is not the rectangle corner {w.rect.lo}")
    return PassageField(tuple(x), w.rect, K.forward_passage(w.values), w)


def passage_time(w, x, y):
    """Scalar L(x, y) on the sub-rectangle [x, y] of ``w``."""
    if not leq(x, y):
        return UNREACHABLE
    sub = w.sub(x, y)
    return float(K.forward_passage(sub.values)[-1, -1])


def brute_force_passage(w, x, y):
    """Maximum over explicitly enumerated up-right paths from x to y."""
    if not leq(x, y):
        return UNREACHABLE
    d1, d2 = y[0] - x[0], y[1] - x[1]
    if d1 + 1 > 12 or d2 + 1 > 12:
        raise SizeError("brute force limited to side 12")
    best = -math.inf
    for ups in itertools.combinations(range(d1 + d2), d2):
        up_set = set(ups)
        i, j = x
        total = w.at((i, j))
        for s in range(d1 + d2):
            if s in up_set:
                j += 1
            else:
                i += 1
            total += w.at((i, j))
        best = max(best, total)
    return best


def reflect_weights(w):
    """w<-_x = w_{lo + hi - x}."""
    return WeightField(w.rect, w.values[::-1, ::-1].copy())


def increments(pf, mode):
    """(I, J) arrays over ``pf.rect``.

    ``terminal``: I[y] = G(x, y) - G(x, y - e1), J[y] = G(x, y) - G(x, y - e2)
    with x the base.  ``initial``: I[p] = G(p, hi) - G(p + e1, hi), and J
    likewise, toward the far corner, obtained from the terminal increments
    of the reflected field.
    """
    vals = pf.weights.values
    if mode == "terminal":
        return K.terminal_increments(vals)
    if mode == "initial":
        return initial_increments(vals)
    raise ContractError(f"unknown mode {mode!r}")


def initial_increments(vals):
    inc_i, inc_j = K.terminal_increments(np.ascontiguousarray(vals[::-1, ::-1]))
    return inc_i[::-1, ::-1].copy(), inc_j[::-1, ::-1].copy()


def backward_passage(vals):
    """L(p, hi) for every p of the array."""
    return K.forward_passage(np.ascontiguousarray(vals[::-1, ::-1]))[::-1, ::-1].copy()


def finite_geodesic(w, x, y, method="backtrack"):
    """The maximizing up-right path from x to y.

    ``backtrack`` walks back from y along the larger predecessor (ties
    toward e2, i.e. the predecessor y - e2); ``forward`` follows the local
    rule from x using passage times to y.  Ties are counted in ``ties``.
    """
    w = _as_field(w)
    sub = w.sub(x, y)
    n1, n2 = sub.rect.shape
    ties = 0
    if method == "backtrack":
        g = K.forward_passage(sub.values)
        i, j = n1 - 1, n2 - 1
        rev = [(i, j)]
        while (i, j) != (0, 0):
            if i == 0:
                j -= 1
            elif j == 0:
                i -= 1
            else:
                left, down = g[i - 1, j], g[i, j - 1]
                if left > down:
                    i -= 1
                else:
                    ties += left == down
                    j -= 1
            rev.append((i, j))
        cells = rev[::-1]
    elif method == "forward":
        lval = backward_passage(sub.values)
        i, j = 0, 0
        cells = [(0, 0)]
        while (i, j) != (n1 - 1, n2 - 1):
            if i == n1 - 1:
                j += 1
            elif j == n2 - 1:
                i += 1
            else:
                right, up = lval[i + 1, j], lval[i, j + 1]
                if right > up:
                    i += 1
                else:
                    ties += right == up
                    j += 1
            cells.append((i, j))
    else:
        raise ContractError(f"unknown method {method!r}")
    sites = np.array(cells, dtype=np.int64) + np.array(x)
    return LatticePath("up-right", sites, int(ties))


def lindley_F(I, J, W):
    """(W + (I - J)+, W + (J - I)+, min(I, J))."""
    return (W + max(I - J, 0.0), W + max(J - I, 0.0), min(I, J))


def dual_weights(w):
    """Dual weights on the rectangle of ``w`` (the corner weight w_lo is ignored)."""
    inc_i, inc_j = K.terminal_increments(w.values)
    n1, n2 = w.rect.shape
    out = np.zeros((n1, n2))
    out[:-1, :-1] = np.minimum(inc_i[1:, :-1], inc_j[:-1, 1:])
    out[:-1, -1] = inc_i[1:, -1]
    out[-1, :-1] = inc_j[-1, 1:]
    out[-1, -1] = 0.0
    return WeightField(w.rect, out)


def passage_no_init(w, x, y):
    """Passage time from x to y with the weight at x removed."""
    if not leq(x, y):
        return UNREACHABLE
    sub = w.sub(x, y)
    vals = sub.values.copy()
    vals[0, 0] = 0.0
    return float(K.forward_passage(vals)[-1, -1])


def dump_field_csv(pf, fh):
    """Write ``i,j,w,G`` rows for every site of the field."""
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["i", "j", "w", "G"])
    lo = pf.rect.lo
    n1, n2 = pf.rect.shape
    for a in range(n1):
        for b in range(n2):
            writer.writerow([lo[0] + a, lo[1] + b, repr(float(pf.weights.values[a, b])),
                             repr(float(pf.G[a, b]))])


def down_right_staircase(start, end):
    """Staircase from ``start`` to ``end`` alternating e1 and -e2 steps."""
    (i, j), (p, q) = start, end
    if p < i or q > j:
        raise PathError("end must lie to the lower right of start")
    sites = [(i, j)]
    while (i, j) != (p, q):
        if i < p and (j == q or (p - i) >= (j - q)):
            i += 1
        else:
            j -= 1
        sites.append((i, j))
    return LatticePath("down-right", sites)
