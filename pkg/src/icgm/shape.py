"""Limit-shape calculus.

For a boundary parameter z the stationary shape is

    gamma_z(xi) = xi1 * int alpha(da)/(a+z) + xi2 * int beta(db)/(b-z),

and the shape at a base point x minimizes it over z between minus the tail
infimum of a and the tail infimum of b.  The minimizer is found by
bisection on the z-derivative, which is strictly increasing.
"""
import math
from dataclasses import dataclass
from functools import total_ordering

import numpy as np

from .environment import measure_moment
from .errors import DomainError, HypothesisError, ModeError, UnresolvableError

END_OFFSET = 1e-12
Z_TOL = 1e-12
MAX_ITER = 200


@total_ordering
@dataclass(frozen=True)
class Direction:
    """Direction (xi1, 1 - xi1); ordered by xi1."""

    xi1: float

    def __post_init__(self):
        if not 0.0 <= self.xi1 <= 1.0:
            raise DomainError(f"xi1={self.xi1} outside [0, 1]")

    @property
    def xi2(self):
        return 1.0 - self.xi1

    def __lt__(self, other):
        return self.xi1 < other.xi1

    def __iter__(self):
        return iter((self.xi1, self.xi2))


def as_direction(xi):
    if isinstance(xi, Direction):
        return xi
    if isinstance(xi, (tuple, list)):
        s = float(xi[0]) + float(xi[1])
        return Direction(float(xi[0]) / s)
    return Direction(float(xi))


@dataclass(frozen=True)
class ShapeReport:
    gamma: float
    chi: float
    at_lower_endpoint: bool
    at_upper_endpoint: bool


@dataclass(frozen=True)
class CriticalPair:
    c1: Direction
    c2: Direction


def _weighted(weight, value):
    # 0 * inf = 0: a direction with no weight on an axis ignores that integral
    return 0.0 if weight == 0 else weight * value


def _gamma(alpha, beta, xi, z):
    return (_weighted(xi.xi1, alpha.moment(z, 1))
            + _weighted(xi.xi2, beta.moment(-z, 1)))


def gamma_z(alpha, beta, xi, z):
    """Stationary shape in direction ``xi`` at boundary parameter ``z``."""
    xi = as_direction(xi)
    lo, hi = -alpha.ess_inf(), beta.ess_inf()
    if not lo <= z <= hi:
        raise DomainError(f"z={z} outside [{lo}, {hi}]")
    return _gamma(alpha, beta, xi, z)


def _dgamma(alpha, beta, xi, z):
    return (-_weighted(xi.xi1, measure_moment(alpha, z, 2))
            + _weighted(xi.xi2, measure_moment(beta, -z, 2)))


def chi_min(env, x, xi):
    """Minimizer chi and value gamma of the shape at base ``x``."""
    xi = as_direction(xi)
    alpha, beta = env.alpha, env.beta
    lo = -env.a.tail_inf(x[0])
    hi = env.b.tail_inf(x[1])
    if xi.xi1 == 0.0:
        return ShapeReport(_gamma(alpha, beta, xi, lo), lo, True, False)
    if xi.xi1 == 1.0:
        return ShapeReport(_gamma(alpha, beta, xi, hi), hi, False, True)
    d_lo = _dgamma(alpha, beta, xi, lo + END_OFFSET)
    d_hi = _dgamma(alpha, beta, xi, hi - END_OFFSET)
    if math.isinf(d_lo) and math.isinf(d_hi) and d_lo > 0 and d_hi < 0:
        raise UnresolvableError("derivative infinite with wrong signs at both ends")
    if d_lo >= 0:
        return ShapeReport(_gamma(alpha, beta, xi, lo), lo, True, False)
    if d_hi <= 0:
        return ShapeReport(_gamma(alpha, beta, xi, hi), hi, False, True)
    left, right = lo, hi
    for _ in range(MAX_ITER):
        mid = 0.5 * (left + right)
        if _dgamma(alpha, beta, xi, mid) < 0:
            left = mid
        else:
            right = mid
        if right - left < Z_TOL:
            break
    z = 0.5 * (left + right)
    return ShapeReport(_gamma(alpha, beta, xi, z), z, False, False)


def _ratio(num, other):
    """num / (other + num) with the 1/inf = 0 conventions."""
    if math.isinf(num) and math.isinf(other):
        raise DomainError("both second moments infinite")
    if math.isinf(num):
        return 1.0
    if math.isinf(other):
        return 0.0
    return num / (other + num)


def rho(alpha, beta, z):
    """Characteristic direction of boundary parameter ``z``."""
    lo, hi = -alpha.ess_inf(), beta.ess_inf()
    if not lo < z < hi:
        raise DomainError(f"z={z} outside ({lo}, {hi})")
    ma = measure_moment(alpha, z, 2)
    mb = measure_moment(beta, -z, 2)
    if math.isinf(ma) or math.isinf(mb):
        raise DomainError("divergent second moment")
    return Direction(mb / (ma + mb))


def critical_dirs(env, x):
    """Endpoints (c1, c2) of the strictly concave region of the shape at x."""
    inf_a = env.a.tail_inf(x[0])
    inf_b = env.b.tail_inf(x[1])
    a_side = measure_moment(env.alpha, -inf_a, 2)
    b_at_a = measure_moment(env.beta, inf_a, 2)
    c1 = 0.0 if math.isinf(a_side) else _ratio(b_at_a, a_side)
    b_side = measure_moment(env.beta, -inf_b, 2)
    a_at_b = measure_moment(env.alpha, inf_b, 2)
    c2 = 1.0 if math.isinf(b_side) else _ratio(b_side, a_at_b)
    return CriticalPair(Direction(c1), Direction(c2))


def thin_limit(env, x, axis, level):
    """Growth rate of passage times in a thin rectangle.

    ``vertical``: columns x1..level are fixed and the rectangle grows up.
    ``horizontal``: rows x2..level are fixed and it grows to the right.
    """
    i, j = x
    if axis == "vertical":
        if level < i:
            raise DomainError("column bound below base")
        m, _ = env.a.running_min(i, level)
        return measure_moment(env.beta, m, 1)
    if axis == "horizontal":
        if level < j:
            raise DomainError("row bound below base")
        m, _ = env.b.running_min(j, level)
        return measure_moment(env.alpha, m, 1)
    raise DomainError(f"unknown axis {axis!r}")


def cesaro_bounds(seq, i, horizon=None):
    """Analytic Cesaro (limsup, liminf), or a dyadic-prefix estimate."""
    from .environment import estimate_cesaro

    declared = seq.cesaro_bounds(i)
    if declared is not None:
        return declared
    return estimate_cesaro(seq, i, horizon or 2 ** 20)


def linear_limit_interval(env, x, side, horizon=None):
    """Interval of xi1 values swept by the flat-side Busemann geodesic.

    ``side`` is ``"c1"`` or ``"c2"``.
    """
    i, j = x
    if side == "c1":
        upper, lower = cesaro_bounds(env.a, i, horizon)
        bconst = measure_moment(env.beta, env.a.tail_inf(i), 2)
        if math.isinf(upper) or math.isinf(lower):
            raise HypothesisError("Cesaro means of (a - inf a)^-2 are infinite")
        return (bconst / (upper + bconst), bconst / (lower + bconst))
    if side == "c2":
        upper, lower = cesaro_bounds(env.b, j, horizon)
        aconst = measure_moment(env.alpha, env.b.tail_inf(j), 2)
        if math.isinf(upper) or math.isinf(lower):
            raise HypothesisError("Cesaro means of (b - inf b)^-2 are infinite")
        return (lower / (aconst + lower), upper / (aconst + upper))
    raise DomainError(f"unknown side {side!r}")


# ---------------------------------------------------------------------------
# speed law of the second-class customer


def require_zero_a(env, probe=64):
    """Raise unless the column rates vanish (holes indistinguishable)."""
    lo = env.a.window[0] if env.a.window[0] is not None else 1
    if env.a.tail_inf(lo) != 0.0 or np.any(env.a.values(lo, lo + probe) != 0.0):
        raise ModeError("this operation needs a identically zero")


def max_speed(env):
    require_zero_a(env)
    return 1.0 / measure_moment(env.beta, 0.0, 1)


def speed_atom(env):
    """P(v = 0) = 1 - inf b / b_1."""
    require_zero_a(env)
    return 1.0 - env.b.tail_inf(1) / env.b.at(1)


def _gamma_xy(env, t):
    """Homogeneous extension of the shape at (1, 1) evaluated at (t, 1)."""
    rep = chi_min(env, (1, 1), Direction(t / (1.0 + t)))
    return (1.0 + t) * rep.gamma


def zeta_of_speed(env, s):
    """Direction zeta(s) whose e1-share solves gamma((t, 1)) = 1/s."""
    target = 1.0 / s
    base = _gamma_xy(env, 0.0)
    if target <= base:
        return Direction(0.0)
    hi = 1.0
    while _gamma_xy(env, hi) < target:
        hi *= 2.0
        if hi > 1e15:
            raise DomainError("speed too small to invert")
    lo = 0.0
    for _ in range(MAX_ITER):
        mid = 0.5 * (lo + hi)
        if _gamma_xy(env, mid) < target:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-13 * max(1.0, hi):
            break
    t = 0.5 * (lo + hi)
    return Direction(t / (1.0 + t))


def speed_cdf(env, s):
    """P(v <= s) for the limiting speed of the second-class customer."""
    smax = max_speed(env)
    if not 0 < s <= smax * (1 + 1e-12):
        raise DomainError(f"s={s} outside (0, {smax}]")
    zeta = zeta_of_speed(env, min(s, smax))
    chi = chi_min(env, (1, 1), zeta).chi
    return 1.0 - chi / env.b.at(1)
