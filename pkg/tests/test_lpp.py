import io
import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from icgm import lpp
from icgm.environment import homogeneous
from icgm.errors import ContractError, SizeError


def field(vals, lo=(0, 0)):
    vals = np.asarray(vals, dtype=float)
    hi = (lo[0] + vals.shape[0] - 1, lo[1] + vals.shape[1] - 1)
    return lpp.WeightField(lpp.Rect(lo, hi), vals)


def random_field(n1, n2, seed, lo=(0, 0)):
    return field(np.random.default_rng(seed).exponential(size=(n1, n2)), lo)


int_fields = st.integers(1, 4).flatmap(lambda n1: st.integers(1, 4).flatmap(
    lambda n2: st.lists(st.integers(1, 5), min_size=n1 * n2, max_size=n1 * n2)
    .map(lambda v: np.array(v).reshape(n1, n2))))


def test_rect_basics():
    r = lpp.Rect((1, 2), (3, 2))
    assert r.shape == (3, 1) and r.size == 3 and not r.empty()
    assert lpp.Rect((2, 0), (1, 5)).empty()
    assert list(r.sites()) == [(1, 2), (2, 2), (3, 2)]


def test_weight_field_contract():
    with pytest.raises(ContractError):
        field([[1.0, np.nan]])
    with pytest.raises(ContractError):
        lpp.WeightField(lpp.Rect((0, 0), (1, 1)), np.ones((2, 3)))


def test_one_by_one():
    w = field([[2.5]])
    assert lpp.passage_times(w).at((0, 0)) == 2.5
    assert lpp.passage_no_init(w, (0, 0), (0, 0)) == 0.0


def test_two_by_two():
    w00, w01, w10, w11 = 1.0, 3.0, 2.0, 0.5
    w = field([[w00, w01], [w10, w11]])
    g = lpp.passage_times(w).at((1, 1))
    assert g == w00 + max(w01, w10) + w11
    assert lpp.brute_force_passage(w, (0, 0), (1, 1)) == g


def test_base_must_be_corner():
    w = random_field(3, 3, 0)
    with pytest.raises(ContractError):
        lpp.passage_times(w, (1, 0))


def test_unreachable_sentinel():
    w = random_field(3, 3, 0)
    pf = lpp.passage_times(w)
    assert pf.at((0, 0)) == w.at((0, 0))
    assert lpp.passage_time(w, (2, 0), (1, 2)) is lpp.UNREACHABLE
    assert lpp.passage_no_init(w, (2, 0), (1, 2)) is lpp.UNREACHABLE
    assert not lpp.UNREACHABLE


def test_brute_force_strip_and_size_limit():
    w = field([[1.5, 2.0]])
    assert lpp.brute_force_passage(w, (0, 0), (0, 1)) == 3.5
    with pytest.raises(SizeError):
        lpp.brute_force_passage(random_field(13, 2, 0), (0, 0), (12, 1))


def test_brute_force_three_by_three():
    w = random_field(3, 3, 11)
    dp = lpp.passage_times(w).at((2, 2))
    assert lpp.brute_force_passage(w, (0, 0), (2, 2)) == pytest.approx(dp, rel=1e-12)


@settings(max_examples=200)
@given(int_fields)
def test_integer_fields_match_enumeration(vals):
    w = field(vals)
    g = lpp.passage_times(w).G
    for y in w.rect.sites():
        assert g[y] == lpp.brute_force_passage(w, (0, 0), y)


def test_random_fields_match_enumeration():
    rng = np.random.default_rng(1)
    for k in range(100):
        n1, n2 = rng.integers(1, 7, size=2)
        w = random_field(n1, n2, 100 + k)
        dp = lpp.passage_times(w).G[-1, -1]
        bf = lpp.brute_force_passage(w, (0, 0), w.rect.hi)
        assert bf == pytest.approx(dp, rel=1e-12)


def test_passage_from_environment():
    env = homogeneous(0.5, seed=4)
    w = lpp.WeightField.from_env(env, lpp.Rect((3, 5), (8, 9)))
    pf = lpp.passage_times(w)
    assert pf.base == (3, 5)
    assert pf.at((8, 9)) == pytest.approx(lpp.brute_force_passage(w, (3, 5), (8, 9)), rel=1e-12)


def test_terminal_increment_on_strip():
    w = field([[1.0, 2.25]])
    _, inc_j = lpp.increments(lpp.passage_times(w), "terminal")
    assert inc_j[0, 1] == 2.25


def test_increments_recover_weights():
    w = random_field(7, 6, 2)
    pf = lpp.passage_times(w)
    inc_i, inc_j = lpp.increments(pf, "terminal")
    np.testing.assert_array_equal(np.minimum(inc_i, inc_j)[1:, 1:], w.values[1:, 1:])
    g = pf.G
    np.testing.assert_allclose(inc_i[1:, :], g[1:, :] - g[:-1, :], rtol=1e-12)
    np.testing.assert_allclose(inc_j[:, 1:], g[:, 1:] - g[:, :-1], rtol=1e-12)
    assert np.isinf(inc_i[0, :]).all() and np.isinf(inc_j[:, 0]).all()


def test_initial_increments():
    w = random_field(5, 4, 3)
    hi = w.rect.hi
    inc_i, inc_j = lpp.increments(lpp.passage_times(w), "initial")
    for p in w.rect.sites():
        if p[0] < hi[0]:
            expect = lpp.passage_time(w, p, hi) - lpp.passage_time(w, (p[0] + 1, p[1]), hi)
            assert inc_i[p] == pytest.approx(expect, rel=1e-12, abs=1e-12)
        else:
            assert np.isinf(inc_i[p])
        if p[1] < hi[1]:
            expect = lpp.passage_time(w, p, hi) - lpp.passage_time(w, (p[0], p[1] + 1), hi)
            assert inc_j[p] == pytest.approx(expect, rel=1e-12, abs=1e-12)
    with pytest.raises(ContractError):
        lpp.increments(lpp.passage_times(w), "sideways")


def _init_inc(w, x, y, step):
    return lpp.passage_time(w, x, y) - lpp.passage_time(w, (x[0] + step[0], x[1] + step[1]), y)


def _term_inc(w, x, y, step):
    return lpp.passage_time(w, x, y) - lpp.passage_time(w, x, (y[0] - step[0], y[1] - step[1]))


@pytest.mark.parametrize("seed", range(5))
def test_comparison_inequalities(seed):
    w = random_field(6, 6, 20 + seed)
    e1, e2 = (1, 0), (0, 1)
    tol = 1e-12
    for x in w.rect.sites():
        for y in w.rect.sites():
            if not lpp.leq(x, y):
                continue
            inner = [(e1, x[0] < y[0]), (e2, x[1] < y[1])]
            # initial increments as the target moves
            for step, ok in inner:
                if not ok:
                    continue
                base = _init_inc(w, x, y, step)
                sign = 1 if step == e1 else -1
                if y[0] < 5:
                    nxt = _init_inc(w, x, (y[0] + 1, y[1]), step)
                    assert sign * (base - nxt) >= -tol
                if y[1] < 5:
                    nxt = _init_inc(w, x, (y[0], y[1] + 1), step)
                    assert sign * (nxt - base) >= -tol
            # terminal increments as the base moves
            for step, ok in inner:
                if not ok:
                    continue
                base = _term_inc(w, x, y, step)
                sign = 1 if step == e1 else -1
                if x[0] > 0:
                    prv = _term_inc(w, (x[0] - 1, x[1]), y, step)
                    assert sign * (base - prv) >= -tol
                if x[1] > 0:
                    prv = _term_inc(w, (x[0], x[1] - 1), y, step)
                    assert sign * (prv - base) >= -tol


@pytest.mark.parametrize("seed", range(5))
def test_planarity(seed):
    w = random_field(8, 8, 40 + seed)
    for x in w.rect.sites():
        for y in w.rect.sites():
            wy = w.at(y)
            if x[0] < y[0] and x[1] <= y[1]:
                left = (y[0] - 1, y[1])
                if lpp.passage_time(w, x, y) == lpp.passage_time(w, x, left) + wy:
                    for p in itertools.product(range(0, x[0] + 1), range(x[1], y[1] + 1)):
                        assert lpp.passage_time(w, p, y) == pytest.approx(
                            lpp.passage_time(w, p, left) + wy, rel=1e-12)
            if x[1] < y[1] and x[0] <= y[0]:
                down = (y[0], y[1] - 1)
                if lpp.passage_time(w, x, y) == lpp.passage_time(w, x, down) + wy:
                    for p in itertools.product(range(x[0], y[0] + 1), range(0, x[1] + 1)):
                        assert lpp.passage_time(w, p, y) == pytest.approx(
                            lpp.passage_time(w, p, down) + wy, rel=1e-12)


def test_geodesic_two_by_two():
    w = field([[1.0, 3.0], [2.0, 1.0]])
    path = lpp.finite_geodesic(w, (0, 0), (1, 1))
    assert [tuple(s) for s in path.sites] == [(0, 0), (0, 1), (1, 1)]


@pytest.mark.parametrize("seed", range(10))
def test_geodesic_weight_sum_and_uniqueness(seed):
    w = random_field(8, 8, 60 + seed, lo=(2, 3))
    x, y = (2, 3), (9, 10)
    back = lpp.finite_geodesic(w, x, y, "backtrack")
    fwd = lpp.finite_geodesic(w, x, y, "forward")
    assert back.weight_sum(w) == pytest.approx(lpp.passage_time(w, x, y), rel=1e-9)
    np.testing.assert_array_equal(back.sites, fwd.sites)
    assert back.tie_flag == 0 and fwd.tie_flag == 0
    steps = np.diff(back.sites, axis=0)
    assert set(map(tuple, steps)) <= {(1, 0), (0, 1)}
    assert back.at_level(back.start_level) == x


def test_geodesic_csv():
    w = random_field(3, 3, 5)
    buf = io.StringIO()
    lpp.finite_geodesic(w, (0, 0), (2, 2)).to_csv(buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "n,i,j"
    assert len(lines) == 6


def test_field_csv():
    w = random_field(2, 3, 6)
    buf = io.StringIO()
    lpp.dump_field_csv(lpp.passage_times(w), buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "i,j,w,G"
    assert len(lines) == 7


def test_lindley_examples():
    assert lpp.lindley_F(3, 1, 2) == (4, 2, 1)
    assert lpp.lindley_F(*lpp.lindley_F(3, 1, 2)) == (3, 1, 2)
    assert lpp.lindley_F(1.5, 1.5, 4.0) == (4.0, 4.0, 1.5)


@given(st.floats(0, 100), st.floats(0, 100), st.floats(0, 100))
def test_lindley_involution(i, j, w):
    back = lpp.lindley_F(*lpp.lindley_F(i, j, w))
    assert back == pytest.approx((i, j, w), abs=1e-9)


def test_reflection():
    w = random_field(5, 5, 7)
    r = lpp.reflect_weights(w)
    np.testing.assert_array_equal(lpp.reflect_weights(r).values, w.values)
    small = random_field(2, 2, 8)
    assert lpp.passage_times(lpp.reflect_weights(small)).G[-1, -1] == pytest.approx(
        lpp.passage_times(small).G[-1, -1])
    rng = np.random.default_rng(9)
    lo, hi = w.rect.lo, w.rect.hi
    for _ in range(10):
        x = tuple(int(v) for v in rng.integers(0, 5, size=2))
        y = (int(rng.integers(x[0], 5)), int(rng.integers(x[1], 5)))
        mx = (lo[0] + hi[0] - y[0], lo[1] + hi[1] - y[1])
        my = (lo[0] + hi[0] - x[0], lo[1] + hi[1] - x[1])
        assert lpp.passage_time(r, x, y) == pytest.approx(lpp.passage_time(w, mx, my), rel=1e-12)


def test_dual_on_unit_square():
    w = field([[0.0, 1.3], [0.4, 2.2]])
    d = lpp.dual_weights(w)
    got = (d.at((0, 1)), d.at((1, 0)), d.at((0, 0)))
    expect = lpp.lindley_F(w.at((1, 0)), w.at((0, 1)), w.at((1, 1)))
    assert got == pytest.approx(expect, rel=1e-12)
    assert d.at((1, 1)) == 0.0


@pytest.mark.parametrize("seed", range(10))
def test_dual_increment_identity(seed):
    w = random_field(4, 4, 80 + seed)
    d = lpp.dual_weights(w)
    assert d.at(w.rect.hi) == 0.0
    dual_i, dual_j = lpp.initial_increments(d.values)
    term_i, term_j = lpp.increments(lpp.passage_times(w), "terminal")
    for x in w.rect.sites():
        if x[0] < 3:
            assert dual_i[x] == pytest.approx(term_i[x[0] + 1, x[1]], rel=1e-12)
        if x[1] < 3:
            assert dual_j[x] == pytest.approx(term_j[x[0], x[1] + 1], rel=1e-12)


@pytest.mark.parametrize("seed", range(10))
def test_dual_then_reflect_is_involution(seed):
    vals = np.random.default_rng(90 + seed).exponential(size=(4, 4))
    vals[0, 0] = 0.0
    w = field(vals)
    once = lpp.reflect_weights(lpp.dual_weights(w))
    assert once.at((0, 0)) == 0.0
    twice = lpp.reflect_weights(lpp.dual_weights(once))
    np.testing.assert_allclose(twice.values, w.values, rtol=1e-12, atol=1e-12)


def test_dual_ignores_corner_weight():
    w = random_field(3, 4, 12)
    vals = w.values.copy()
    vals[0, 0] = 100.0
    np.testing.assert_array_equal(lpp.dual_weights(w).values, lpp.dual_weights(field(vals)).values)


def test_passage_without_initial_weight():
    w = random_field(3, 3, 13)
    x, y = (0, 0), (2, 2)
    no_init = lpp.passage_no_init(w, x, y)
    assert no_init == pytest.approx(lpp.passage_time(w, x, y) - w.at(x), abs=1e-12)
    vals = w.values.copy()
    vals[0, 0] = 0.0
    assert no_init == pytest.approx(lpp.brute_force_passage(field(vals), x, y), rel=1e-12)


def test_down_right_staircase():
    path = lpp.down_right_staircase((0, 3), (3, 0))
    steps = set(map(tuple, np.diff(path.sites, axis=0)))
    assert steps <= {(1, 0), (0, -1)}
