import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from icgm.environment import (IID, Atomic, Block, Constant, Environment, Explicit,
                              interval_block_rule)
from icgm.errors import DomainError, HypothesisError, ModeError
from icgm.shape import (Direction, chi_min, critical_dirs, gamma_z, linear_limit_interval,
                        max_speed, rho, speed_atom, speed_cdf, thin_limit)

HALF = Atomic(((0.5, 1.0),))
DYADIC = Block(0.5, {"kind": "sparse", "value": 0.25}, window=(0, None))


@pytest.fixture(scope="module")
def fig2():
    return Environment(DYADIC, DYADIC, seed=1)


def test_gamma_z_examples():
    assert gamma_z(HALF, HALF, 0.5, 0.0) == pytest.approx(2.0)
    assert gamma_z(HALF, HALF, 1.0, 0.0) == pytest.approx(2.0)
    assert gamma_z(HALF, HALF, 0.5, 0.25) == pytest.approx(8 / 3)
    with pytest.raises(DomainError):
        gamma_z(HALF, HALF, 0.5, 0.6)


def test_chi_min_examples(fig2):
    mid = chi_min(fig2, (0, 0), 0.5)
    assert mid.chi == pytest.approx(0.0, abs=1e-10)
    assert mid.gamma == pytest.approx(2.0)
    axis = chi_min(fig2, (0, 0), 0.0)
    assert axis.chi == -0.25
    assert axis.gamma == pytest.approx(4 / 3)
    flat = chi_min(fig2, (0, 0), 0.05)
    assert flat.chi == -0.25 and flat.at_lower_endpoint and not flat.at_upper_endpoint
    assert chi_min(fig2, (0, 0), 0.95).chi == 0.25


def test_rho_examples(fig2):
    assert rho(HALF, HALF, 0.0).xi1 == pytest.approx(0.5)
    assert rho(HALF, HALF, 0.25 - 1e-15).xi1 == pytest.approx(0.9)
    back = rho(fig2.alpha, fig2.beta, chi_min(fig2, (0, 0), 0.3).chi)
    assert back.xi1 == pytest.approx(0.3, abs=1e-8)
    with pytest.raises(DomainError):
        rho(HALF, HALF, 0.5)


def test_critical_directions(fig2):
    crit = critical_dirs(fig2, (0, 0))
    assert crit.c1.xi1 == pytest.approx(0.1, abs=1e-9)
    assert crit.c2.xi1 == pytest.approx(0.9, abs=1e-9)
    ex5 = Environment(IID(0.0, 1.0, 6.0, seed=11), Constant(1.0))
    assert critical_dirs(ex5, (1, 1)).c1.xi1 == pytest.approx(5 / 12, abs=1e-6)
    ex3 = Environment(Block(1.0, interval_block_rule(0.2, 0.4)), Constant(1.0))
    assert critical_dirs(ex3, (1, 1)).c1.xi1 == pytest.approx(0.5, abs=1e-12)
    uniform = Environment(IID(0.0, 1.0, 0.0, seed=2), Constant(1.0))
    assert critical_dirs(uniform, (1, 1)).c1.xi1 == 0.0


def test_thin_limit_examples():
    env = Environment(Explicit([1.0, 0.5], 1.0), Constant(1.0))
    assert thin_limit(env, (1, 1), "vertical", 2) == pytest.approx(2 / 3)
    assert thin_limit(env, (1, 1), "vertical", 1) == pytest.approx(1 / 2)
    homog = Environment(Constant(0.5), Constant(0.5))
    assert thin_limit(homog, (1, 1), "horizontal", 9) == pytest.approx(1.0)


def test_linear_limit_intervals():
    ex3 = Environment(Block(1.0, interval_block_rule(0.2, 0.4)), Constant(1.0))
    lo, hi = linear_limit_interval(ex3, (1, 1), "c1")
    assert lo == pytest.approx(0.2, abs=1e-6) and hi == pytest.approx(0.4, abs=1e-6)
    ex4 = Environment(Block(1.0, {"kind": "square", "p": 0.25, "r": 1.0}), Constant(1.0))
    assert linear_limit_interval(ex4, (1, 1), "c1") == pytest.approx((1 / 3, 1 / 3))
    dexp = Environment(Block(1.0, {"kind": "double_exp", "p": 0.25, "r": 2.0}), Constant(1.0))
    assert linear_limit_interval(dexp, (1, 1), "c1") == pytest.approx((1 / 2.5, 0.5))
    ex5 = Environment(IID(0.0, 1.0, 6.0, seed=11), Constant(1.0))
    lo, hi = linear_limit_interval(ex5, (1, 1), "c1", horizon=2 ** 16)
    assert lo == pytest.approx(5 / 12, abs=1e-6) and hi == pytest.approx(5 / 12, abs=1e-6)
    with pytest.raises(HypothesisError):
        linear_limit_interval(ex3, (1, 1), "c2")


def _fig2_like(lo):
    seq = Block(0.5, {"kind": "sparse", "value": lo}, window=(0, None))
    return Environment(seq, seq)


@given(st.floats(0.001, 0.999), st.floats(-0.249, 0.249))
def test_envelope(xi1, z):
    env = _fig2_like(0.25)
    best = chi_min(env, (0, 0), xi1).gamma
    assert gamma_z(env.alpha, env.beta, xi1, z) >= best - 1e-9


@given(st.floats(0.1001, 0.8999))
def test_round_trip_in_concave_region(xi1):
    env = _fig2_like(0.25)
    rep = chi_min(env, (0, 0), xi1)
    assert rho(env.alpha, env.beta, rep.chi).xi1 == pytest.approx(xi1, abs=1e-8)


@given(st.floats(0.0, 0.1), st.floats(0.9, 1.0))
def test_clamping(low, high):
    env = _fig2_like(0.25)
    assert chi_min(env, (0, 0), low).chi == -0.25
    assert chi_min(env, (0, 0), high).chi == 0.25


def test_linearity_on_flat_segments(fig2):
    g0 = chi_min(fig2, (0, 0), 0.0).gamma
    g1 = chi_min(fig2, (0, 0), 0.1).gamma
    for t in np.linspace(0.01, 0.09, 10):
        assert chi_min(fig2, (0, 0), t).gamma == pytest.approx(g0 + (g1 - g0) * t / 0.1, abs=1e-8)
    h0 = chi_min(fig2, (0, 0), 0.9).gamma
    h1 = chi_min(fig2, (0, 0), 1.0).gamma
    for t in np.linspace(0.91, 0.99, 10):
        assert chi_min(fig2, (0, 0), t).gamma == pytest.approx(h0 + (h1 - h0) * (t - 0.9) / 0.1,
                                                               abs=1e-8)


def test_critical_direction_monotone_in_base():
    a = Explicit([0.4, 0.9, 0.6, 0.3, 1.0, 0.8], 0.7)
    b = Explicit([0.5, 0.2, 0.9, 0.6, 1.0], 0.8)
    env = Environment(a, b)
    c1 = [critical_dirs(env, (i, 1)).c1.xi1 for i in range(1, 8)]
    c2 = [critical_dirs(env, (1, j)).c2.xi1 for j in range(1, 7)]
    assert all(x >= y - 1e-15 for x, y in zip(c1, c1[1:]))
    assert all(x <= y + 1e-15 for x, y in zip(c2, c2[1:]))


def test_direction_ordering():
    assert Direction(0.2) < Direction(0.3)
    assert tuple(Direction(0.25)) == (0.25, 0.75)
    with pytest.raises(DomainError):
        Direction(1.5)


def test_speed_law_examples():
    env = Environment(Constant(0.0), Constant(1.0))
    assert max_speed(env) == pytest.approx(1.0)
    assert speed_atom(env) == 0.0
    assert speed_cdf(env, 1.0) == pytest.approx(1.0, abs=1e-8)
    for s in (0.04, 0.25, 0.64):
        assert speed_cdf(env, s) == pytest.approx(math.sqrt(s), abs=1e-7)
    trap = Environment(Constant(0.0), Explicit([1.0, 0.5], 1.0))
    assert speed_atom(trap) == pytest.approx(0.5)
    assert speed_cdf(trap, max_speed(trap)) == pytest.approx(1.0, abs=1e-8)
    with pytest.raises(DomainError):
        speed_cdf(env, 1.5)
    with pytest.raises(ModeError):
        speed_cdf(Environment(Constant(0.5), Constant(0.5)), 0.5)
