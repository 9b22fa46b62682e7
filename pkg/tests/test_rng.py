import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from icgm import rng


@given(st.integers(0, 2**64 - 1), st.integers(-10**6, 10**6), st.integers(-10**6, 10**6))
@settings(max_examples=200)
def test_compiled_and_reference_uniforms_agree(seed, i, j):
    key = rng.stream_key(seed, "bulk")
    u = rng.site_uniform(rng.as_key(key), i, j)
    assert u == rng.site_uniform_py(key, i, j)
    assert 0.0 < u < 1.0


def test_streams_are_distinct_and_reproducible():
    assert rng.stream_key(1, "bulk") == rng.stream_key(1, "bulk")
    assert rng.stream_key(1, "bulk") != rng.stream_key(1, "boundary")
    assert rng.stream_key(1, "bulk") != rng.stream_key(2, "bulk")
    assert rng.derive_seed(0, "replica", 3) != rng.derive_seed(0, "replica", 4)


def test_exp_block_matches_single_sites():
    key = rng.as_key(rng.stream_key(9, "bulk"))
    block = rng.exp_block(key, -2, 5, 4, 3)
    for a in range(4):
        for b in range(3):
            assert block[a, b] == rng.site_exp(key, -2 + a, 5 + b)


def test_exponential_variates_have_unit_mean():
    key = rng.as_key(rng.stream_key(4, "bulk"))
    block = rng.exp_block(key, 1, 1, 300, 300)
    assert abs(block.mean() - 1.0) < 0.01
    assert np.all(block > 0)
