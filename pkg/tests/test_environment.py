import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from icgm import rng
from icgm.environment import (IID, Atomic, Block, Constant, Environment, Explicit, Periodic,
                              PowerDensity, estimate_cesaro, homogeneous, interval_block_rule,
                              measure_from_dict, measure_moment, param_at, running_min,
                              sequence_from_dict, tail_inf, vague_consistency)
from icgm.errors import (ConfigError, DomainError, EmptyRangeError, InvalidEnvironment,
                         WindowError)
from icgm.stats import exp_cdf, ks_distance

EX3 = Block(1.0, {"kind": "geometric", "t": 6, "p": 0.25, "r": 0.4})


def test_param_at_examples():
    assert param_at(Constant(0.5), 7) == 0.5
    assert param_at(Explicit([1, 0.5], 1.0), 2) == 0.5
    assert param_at(EX3, 6) == pytest.approx(math.sqrt(0.4) * 6 ** -0.25, rel=1e-15)
    assert param_at(EX3, 5) == 1.0
    assert param_at(EX3, 8) == param_at(EX3, 6)
    assert param_at(EX3, 9) == 1.0


def test_window_violation():
    with pytest.raises(WindowError):
        param_at(Explicit([1, 0.5], 1.0), 0)
    with pytest.raises(WindowError):
        param_at(Constant(1.0, window=(1, 5)), 6)


def test_running_min_examples():
    assert running_min(Explicit([1, 0.5, 1], 1.0), 1, 3) == (0.5, 2)
    assert running_min(Constant(0.5), 1, 10) == (0.5, 1)
    assert running_min(Explicit([1, 0.5, 0.5], 1.0), 1, 3) == (0.5, 2)
    with pytest.raises(EmptyRangeError):
        running_min(Constant(0.5), 3, 2)


def test_tail_inf_examples():
    assert tail_inf(Explicit([1, 0.5], 1.0), 1) == 0.5
    assert tail_inf(Explicit([1, 0.5], 1.0), 3) == 1.0
    assert tail_inf(EX3, 1) == 0.0
    assert tail_inf(Constant(0.5), -4) == 0.5
    assert tail_inf(Periodic((0.3, 0.7)), 2) == 0.3


@given(st.lists(st.floats(0.05, 5.0), min_size=1, max_size=12), st.floats(0.05, 5.0),
       st.integers(1, 12))
def test_explicit_tail_inf_is_true_infimum(values, tail, i):
    seq = Explicit(values, tail)
    direct = min(seq.values(i, i + len(values) + 5))
    assert seq.tail_inf(i) == pytest.approx(min(direct, tail))


@given(st.lists(st.floats(0.05, 5.0), min_size=1, max_size=20), st.integers(1, 20))
def test_running_min_first_attainment(values, k):
    seq = Explicit(values, 10.0)
    m, idx = seq.running_min(1, k)
    vals = seq.values(1, k)
    assert m == vals.min()
    assert idx == 1 + int(np.flatnonzero(vals == m)[0])


def test_measure_moments():
    assert measure_moment(Atomic(((0.5, 1.0),)), 0.25, 2) == pytest.approx(16 / 9)
    assert measure_moment(PowerDensity(0.0, 1.0, 7.0, 6.0), 0.0, 2) == pytest.approx(1.4, abs=1e-6)
    assert measure_moment(Atomic(((0.5, 1.0),)), -0.5, 1) == math.inf
    assert measure_moment(PowerDensity(0.0, 1.0, 1.0, 0.0), 0.0, 1) == math.inf
    with pytest.raises(DomainError):
        measure_moment(Atomic(((0.5, 1.0),)), -0.6, 1)


def test_power_density_quadrature_accuracy():
    mu = PowerDensity(0.0, 1.0, 7.0, 6.0)
    # integral of 7 t^6 / (t + 1) dt on (0, 1) = 7 (1/6 - 1/5 + 1/4 - 1/3 + 1/2 - 1 + ln 2)
    exact = 7 * (1 / 6 - 1 / 5 + 1 / 4 - 1 / 3 + 1 / 2 - 1 + math.log(2))
    assert measure_moment(mu, 1.0, 1) == pytest.approx(exact, rel=1e-12)
    assert mu.mass() == pytest.approx(1.0, rel=1e-12)


def test_sample_weight_determinism():
    env = homogeneous(0.5, 0.5, seed=11)
    assert env.sample_weight((3, 4)) == env.sample_weight((3, 4))
    assert Environment(Constant(0.5), Constant(0.5), seed=11).sample_weight((3, 4)) == \
        env.sample_weight((3, 4))
    block = env.weights((1, 1), (5, 5))
    assert block[2, 3] == env.sample_weight((3, 4))


def test_weight_means_over_seeds():
    half = homogeneous(0.5, 0.5)
    one = homogeneous(1.0, 1.0)
    w1 = np.array([half.with_seed(s).sample_weight((1, 1)) for s in range(20000)])
    w2 = np.array([one.with_seed(s).sample_weight((1, 1)) for s in range(20000)])
    assert abs(w1.mean() - 1.0) < 0.02
    assert abs(w2.mean() - 0.5) < 0.01


def test_unit_exponential_ks_over_seeds():
    env = Environment(Explicit([1.0, 0.5], 1.0), Constant(1.0))
    tau = [env.with_seed(s).sample_weight((2, 3)) * 1.5 for s in range(10000)]
    assert ks_distance(tau, exp_cdf(1.0)) < 0.02


def test_invalid_environments_rejected():
    with pytest.raises(InvalidEnvironment):
        Environment(Constant(0.0), Constant(0.0))
    with pytest.raises(InvalidEnvironment):
        Environment(Constant(-0.5), Constant(0.5))
    env = Environment(Constant(0.0), Constant(1.0))
    assert env.sample_weight((1, 1)) > 0


def test_iid_recipe_is_quenched():
    seq = IID(0.0, 1.0, 6.0, seed=3)
    env = Environment(seq, Constant(1.0), seed=1)
    assert np.array_equal(env.with_seed(2).a.values(1, 50), seq.values(1, 50))
    assert seq.values(1, 50).min() > 0
    assert IID(0.0, 1.0, 6.0, seed=4).at(1) != seq.at(1)


def test_json_round_trip():
    for seq in (Constant(0.5), Explicit([1, 0.5], 1.0), Periodic((0.3, 0.7)), EX3,
                IID(0.0, 1.0, 6.0, seed=3)):
        env = Environment(seq, Constant(1.0), seed=5)
        back = Environment.from_dict(env.to_dict())
        assert np.array_equal(back.a.values(1, 40), env.a.values(1, 40))
        assert back.seed == 5
        assert back.weights((1, 1), (3, 3)).tolist() == env.weights((1, 1), (3, 3)).tolist()
    for mu in (Atomic(((0.5, 1.0),)), PowerDensity(0.0, 1.0, 7.0, 6.0)):
        assert measure_from_dict(mu.to_dict()) == mu


def test_unknown_keys_rejected():
    d = homogeneous().to_dict()
    d["colour"] = 1
    with pytest.raises(ConfigError) as exc:
        Environment.from_dict(d)
    assert exc.value.key == "colour"
    with pytest.raises(ConfigError):
        sequence_from_dict({"kind": "wavy"})


def test_vague_consistency_for_simple_recipes():
    assert vague_consistency(Periodic((0.3, 0.7)), Atomic(((0.3, 0.5), (0.7, 0.5)))) < 0.05
    assert vague_consistency(Explicit([1, 0.5], 1.0), Atomic(((1.0, 1.0),))) < 0.05


def test_block_rule_targets_interval():
    rule = interval_block_rule(0.2, 0.4)
    assert rule["t"] == pytest.approx(6.0)
    assert rule["r"] == pytest.approx(0.4)
    lim_sup, lim_inf = Block(1.0, rule).cesaro_bounds(1)
    assert lim_sup == pytest.approx(1 + 6 / (0.4 * 5))
    assert lim_inf == pytest.approx(1 + 1 / (0.4 * 5))


def test_numerical_cesaro_estimate_brackets_analytic():
    seq = Block(1.0, {"kind": "square", "p": 0.25, "r": 1.0})
    est = estimate_cesaro(seq, 1, 2 ** 20, inf=0.0)
    hi, lo = seq.cesaro_bounds(1)
    assert hi == lo == pytest.approx(2.0)
    assert abs(est[0] - 2.0) < 0.3 and abs(est[1] - 2.0) < 0.3
