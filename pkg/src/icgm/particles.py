"""Inhomogeneous TASEP under the step coupling, the *pair, and the queue view.

Clocks: the simulator runs on the absolute swap clock, in which pair (i, j)
swaps at T(i, j) = G((1, 1), (i, j)) starting from the step configuration
(particles on sites <= 0, holes on sites >= 1).  The first swap, of pair
(1, 1), happens at omega(1, 1) and produces the configuration with
P_1 = 1, H_1 = 0.  Star-pair and queue quantities are reported on the
shifted clock t = T - omega(1, 1), which starts at that configuration.
"""
import heapq
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from . import rng
from .errors import DomainError
from .shape import max_speed, require_zero_a, speed_cdf


def rost_swap_times(env, M):
    """Swap-time table T[i-1, j-1] via an anti-diagonal max-plus sweep."""
    if M < 1:
        raise DomainError("M must be at least 1")
    w = env.weights((1, 1), (M, M))
    t = np.zeros((M + 1, M + 1))
    for d in range(2, 2 * M + 1):
        i = np.arange(max(1, d - M), min(M, d - 1) + 1)
        j = d - i
        t[i, j] = np.maximum(t[i - 1, j], t[i, j - 1]) + w[i - 1, j - 1]
    return t[1:, 1:]


@dataclass(eq=False)
class TasepState:
    M: int
    H: np.ndarray
    P: np.ndarray
    T: np.ndarray
    t: float
    events: list = field(default_factory=list)

    @property
    def omega11(self):
        return self.T[0, 0]

    def hole(self, i):
        return int(self.H[i - 1])

    def particle(self, j):
        return int(self.P[j - 1])

    def swaps_by(self, t):
        return sum(1 for s, _, _ in self.events if s <= t)

    def light_cone(self):
        """Absolute time up to which the window edge cannot matter."""
        edge = [v for v in (self.T[self.M - 1, 0], self.T[0, self.M - 1]) if not np.isnan(v)]
        return float(min(edge, default=math.inf))

    def to_csv(self):
        rows = ["t,event,i,j"]
        for k, (s, i, j) in enumerate(self.events):
            rows.append(f"{s!r},{k},{i},{j}")
        return "\n".join(rows) + "\n"


def _check_order(H, P, i, j):
    M = len(H)
    if i > 1 and not H[i - 2] < H[i - 1]:
        return False
    if i < M and not H[i - 1] < H[i]:
        return False
    if j > 1 and not P[j - 1] < P[j - 2]:
        return False
    if j < M and not P[j] < P[j - 1]:
        return False
    return True


def simulate_tasep(env, M, t_max=None, check=True):
    """Event-driven TASEP on particles and holes 1..M from the step state.

    An adjacent particle j, hole i pair waits omega(i, j) before swapping.
    Pairs with an index above M never swap.  ``t_max`` is on the absolute
    clock; None runs until every pair in the window has swapped.
    """
    if M < 1:
        raise DomainError("M must be at least 1")
    w = env.weights((1, 1), (M, M))
    H = np.arange(1, M + 1, dtype=np.int64)
    P = 1 - np.arange(1, M + 1, dtype=np.int64)
    T = np.full((M, M), np.nan)
    heap = [(w[0, 0], 1, 1)]
    events = []
    now = 0.0
    limit = math.inf if t_max is None else t_max
    while heap and heap[0][0] <= limit:
        now, i, j = heapq.heappop(heap)
        H[i - 1], P[j - 1] = P[j - 1], H[i - 1]
        T[i - 1, j - 1] = now
        events.append((now, i, j))
        if check and not _check_order(H, P, i, j):
            raise AssertionError(f"exclusion order broken at event {(i, j)}")
        if j < M and P[j] == H[i - 1] - 1:
            heapq.heappush(heap, (now + w[i - 1, j], i, j + 1))
        if i < M and H[i] == P[j - 1] + 1:
            heapq.heappush(heap, (now + w[i, j - 1], i + 1, j))
    if t_max is not None:
        now = t_max
    return TasepState(M, H, P, T, now, events)


def simulate_tasep_two_clock(env, M, t_max, seed):
    """Reference dynamics with one Poisson clock per hole and per particle.

    Uses its own generator, so it agrees with :func:`simulate_tasep` in law
    only.  Returns the absolute swap times as a table (nan = no swap).
    """
    gen = np.random.default_rng(seed)
    a = env.a.values(1, M)
    b = env.b.values(1, M)
    pos = {}
    for k in range(1, M + 1):
        pos[("h", k)] = k
        pos[("p", k)] = 1 - k
    site = {v: k for k, v in pos.items()}
    rings = []
    for k in range(1, M + 1):
        if a[k - 1] > 0:
            rings.append((gen.exponential(1 / a[k - 1]), "h", k))
        if b[k - 1] > 0:
            rings.append((gen.exponential(1 / b[k - 1]), "p", k))
    heapq.heapify(rings)
    T = np.full((M, M), np.nan)
    while rings and rings[0][0] <= t_max:
        now, kind, k = heapq.heappop(rings)
        rate = a[k - 1] if kind == "h" else b[k - 1]
        heapq.heappush(rings, (now + gen.exponential(1 / rate), kind, k))
        here = pos[(kind, k)]
        other = site.get(here - 1 if kind == "h" else here + 1)
        if other is None or other[0] == kind:
            continue
        i, j = (k, other[1]) if kind == "h" else (other[1], k)
        hi, pj = pos[("h", i)], pos[("p", j)]
        pos[("h", i)], pos[("p", j)] = pj, hi
        site[pj], site[hi] = ("h", i), ("p", j)
        T[i - 1, j - 1] = now
    return T


@dataclass(frozen=True, eq=False)
class StarPair:
    """(I, J) after each jump, with jump times on the shifted clock."""
    times: np.ndarray
    I: np.ndarray
    J: np.ndarray
    omega11: float
    horizon: float

    def index_at(self, t):
        if t < 0:
            raise DomainError("time must be nonnegative")
        return int(np.searchsorted(self.times, t, side="right")) - 1

    def at(self, t):
        k = self.index_at(t)
        return int(self.I[k]), int(self.J[k])

    def hole_pos(self, t):
        i, j = self.at(t)
        return i - j

    def sites(self):
        return np.stack([self.I, self.J], axis=1)


def star_pair_trajectory(state):
    """Replay the event log: pair (I+1, J) swapping moves I, (I, J+1) moves J.

    The first kind moves the *pair right, the second moves it left.
    """
    if not state.events or state.events[0][1:] != (1, 1):
        raise DomainError("trajectory must include the first swap")
    t0 = state.events[0][0]
    I, J = 1, 1
    times, Is, Js = [0.0], [1], [1]
    for s, i, j in state.events[1:]:
        if (i, j) == (I + 1, J):
            I += 1
        elif (i, j) == (I, J + 1):
            J += 1
        else:
            continue
        times.append(s - t0)
        Is.append(I)
        Js.append(J)
    horizon = min(state.light_cone(), state.t) - t0
    return StarPair(np.array(times), np.array(Is), np.array(Js), float(t0), float(horizon))


def second_class_position(star, t):
    i, j = star.at(t)
    return i - j


@dataclass(frozen=True, eq=False)
class ZrpState:
    tasep: TasepState
    star: StarPair
    b: np.ndarray

    def queues_at(self, t):
        """eta_j for j = 2..M at shifted time t, replayed from the log."""
        M = self.tasep.M
        P = 1 - np.arange(1, M + 1, dtype=np.int64)
        H = np.arange(1, M + 1, dtype=np.int64)
        limit = t + self.star.omega11
        for s, i, j in self.tasep.events:
            if s > limit:
                break
            H[i - 1], P[j - 1] = P[j - 1], H[i - 1]
        return P[:-1] - P[1:] - 1

    def Z(self, t):
        return self.star.at(t)[1] + 1

    def passed(self, t):
        """First-class customers that have overtaken the second-class one."""
        return self.star.at(t)[0] - 1


def simulate_zrp(env, M, t_max):
    """Queue view on stations 1..M up to shifted time ``t_max``."""
    require_zero_a(env)
    state = simulate_tasep(env, M, t_max=None if t_max is None else
                           t_max + env.sample_weight((1, 1)))
    return ZrpState(state, star_pair_trajectory(state), env.b.values(1, M))


def z_limit_distribution(env, n_max=None):
    """Law of the final station of the second-class customer.

    Keys are stations n >= 2, ``inf``, and ``"beyond"`` for finite mass past
    ``n_max`` (default: where the running minimum reaches the tail infimum,
    capped at 1000).
    """
    require_zero_a(env)
    b = env.b
    b1 = b.at(1)
    tinf = b.tail_inf(1)
    if n_max is None:
        at = b.inf_attained_at(1)
        n_max = 1001 if at is None else min(at + 1, 1001)
    mins = b.running_min_array(1, n_max)
    pmf = {n: float((mins[n - 2] - mins[n - 1]) / b1) for n in range(2, n_max + 1)}
    pmf[math.inf] = float(tinf / b1)
    beyond = float((mins[n_max - 1] - tinf) / b1)
    if beyond > 0:
        pmf["beyond"] = beyond
    return pmf


def window_for(env, t_max):
    """Window size whose edge is out of reach by shifted time t_max w.h.p."""
    probe = max(64, int(3 * t_max) + 64)
    r = float(env.a.values(1, probe).max() + env.b.values(1, probe).max())
    lam = t_max * r
    return int(math.ceil(1.2 * lam + 6 * math.sqrt(lam) + 20))


def star_pair_fast(env, t_max, M=None):
    """(cells, shifted times, hit_edge) from a swap-time table and one trace."""
    if M is None:
        M = window_for(env, t_max)
    g = K.forward_passage(env.weights((1, 1), (M, M)))
    cells, times, hit = K.star_pair_path(g, t_max + g[0, 0], 2 * M)
    return cells + 1, times - g[0, 0], bool(hit)


def _state_at(cells, times, t):
    k = int(np.searchsorted(times, t, side="right")) - 1
    return int(cells[k, 0]), int(cells[k, 1])


def zrp_dichotomy(env, t_max, replicas, threshold=0.1, start=0, M=None):
    """Classify replicas at t_max: stabilized, escaped, or ambiguous.

    Stabilized means Z did not change on [t_max / 2, t_max]; escaped means
    Z(t_max) / t_max >= threshold.
    """
    require_zero_a(env)
    if M is None:
        M = window_for(env, t_max)
    z_final, stab, esc, edge = [], [], [], 0
    for r in range(start, start + replicas):
        rep = env.with_seed(rng.derive_seed(env.seed, "replica", r))
        cells, times, hit = star_pair_fast(rep, t_max, M)
        edge += hit
        z = _state_at(cells, times, t_max)[1] + 1
        z_half = _state_at(cells, times, t_max / 2)[1] + 1
        z_final.append(z)
        stab.append(z == z_half)
        esc.append(z / t_max >= threshold)
    stab = np.array(stab)
    esc = np.array(esc)
    z_final = np.array(z_final)
    return {"replicas": replicas, "t_max": t_max, "M": M, "threshold": threshold,
            "z": z_final.tolist(),
            "stabilized_fraction": float(stab.mean()),
            "stabilized_at_2": float(np.mean(stab & (z_final == 2))),
            "escaped_fraction": float(np.mean(esc & ~stab)),
            "ambiguous_fraction": float(np.mean(~stab & ~esc)),
            "edge_hits": int(edge)}


def speed_sample(env, t, replicas, start=0, M=None):
    """Z(t) / t over replicas, for comparison with the speed law."""
    require_zero_a(env)
    if M is None:
        M = window_for(env, t)
    out = np.empty(replicas)
    for k, r in enumerate(range(start, start + replicas)):
        rep = env.with_seed(rng.derive_seed(env.seed, "replica", r))
        cells, times, _ = star_pair_fast(rep, t, M)
        out[k] = (_state_at(cells, times, t)[1] + 1) / t
    return out


def speed_law_cdf(env):
    """Vectorized CDF of the limiting speed, 0 below 0 and 1 above the max.

    Finite-time speeds Z(t)/t can overshoot the maximal speed, so the
    strict domain check of speed_cdf is relaxed here.
    """
    smax = max_speed(env)

    def cdf(s):
        s = np.asarray(s, dtype=float)
        vals, inv = np.unique(s.ravel(), return_inverse=True)
        f = np.array([0.0 if v <= 0 else 1.0 if v >= smax else speed_cdf(env, v)
                      for v in vals])
        out = f[inv]
        return out.reshape(s.shape) if s.ndim else float(out[0])
    return cdf


def position_sample(env, t, replicas, start=0, M=None):
    """Second-class particle positions X(t) = I - J over replicas."""
    if M is None:
        M = window_for(env, t)
    out = np.empty(replicas, dtype=np.int64)
    for k, r in enumerate(range(start, start + replicas)):
        rep = env.with_seed(rng.derive_seed(env.seed, "replica", r))
        cells, times, _ = star_pair_fast(rep, t, M)
        i, j = _state_at(cells, times, t)
        out[k] = i - j
    return out
