import numpy as np
import pytest

from shl.errors import InvalidDistributionError
from shl.rng import MasterSeed, make_stream

# Golden first draws of (seed=7, stream 0); pin determinism across
# platforms and refactors, not external correctness.
GOLDEN_7_0 = [
    0.25672339159602164,
    0.5553438412389403,
    0.6558846913910217,
    0.5588495094220094,
    0.1674940578693206,
]


def test_determinism_golden():
    s = make_stream(MasterSeed(7), 0)
    assert [s.next_uniform() for _ in range(5)] == GOLDEN_7_0


def test_same_args_same_sequence():
    a = make_stream(MasterSeed(7), 0).uniforms(1000)
    b = make_stream(MasterSeed(7), 0).uniforms(1000)
    assert np.array_equal(a, b)


def test_distinct_stream_ids_differ():
    a = make_stream(MasterSeed(7), 0).uniforms(10_000)
    b = make_stream(MasterSeed(7), 1).uniforms(10_000)
    assert np.any(a != b)


def test_distinct_seeds_differ():
    a = make_stream(MasterSeed(7), 0).uniforms(10_000)
    b = make_stream(MasterSeed(8), 0).uniforms(10_000)
    assert np.any(a != b)


def test_scalar_and_vector_paths_agree():
    s1 = make_stream(MasterSeed(42), 3)
    s2 = make_stream(MasterSeed(42), 3)
    scalars = np.array([s1.next_uniform() for _ in range(50)])
    assert np.array_equal(scalars, s2.uniforms(50))
    # interleaving keeps the counter consistent
    assert s1.next_uniform() == s2.next_uniform()


def test_uniform_range_and_mean():
    u = make_stream(MasterSeed(1), 0).uniforms(10**6)
    assert u.min() >= 0.0 and u.max() < 1.0
    # CLT 4-sigma bound: 4 * (1/sqrt(12)) / 1e3
    assert abs(u.mean() - 0.5) < 0.002


def test_uniform_ks_distance():
    u = np.sort(make_stream(MasterSeed(2), 0).uniforms(10**6))
    n = u.size
    grid = np.arange(1, n + 1) / n
    d = max(np.max(grid - u), np.max(u - (grid - 1 / n)))
    assert d < 0.002


def test_stream_independence_correlation():
    a = make_stream(MasterSeed(9), 0).uniforms(10**5)
    b = make_stream(MasterSeed(9), 1).uniforms(10**5)
    assert abs(np.corrcoef(a, b)[0, 1]) < 0.01


def test_advancing_one_stream_does_not_affect_another():
    a = make_stream(MasterSeed(5), 0)
    b = make_stream(MasterSeed(5), 1)
    a.uniforms(1000)
    assert b.uniforms(5).tolist() == make_stream(MasterSeed(5), 1).uniforms(5).tolist()


def test_categorical_degenerate():
    s = make_stream(MasterSeed(1), 0)
    assert all(s.sample_categorical([1, 0, 0]) == 0 for _ in range(100))


def test_categorical_frequency():
    s = make_stream(MasterSeed(1), 0)
    x = s.sample_categoricals(10**6, [1, 1])
    # binomial 4-sigma bound: 4 * 0.5 / 1e3
    assert abs(np.mean(x == 0) - 0.5) < 0.002


def test_categorical_consumes_one_draw():
    s1 = make_stream(MasterSeed(3), 0)
    s2 = make_stream(MasterSeed(3), 0)
    s1.sample_categorical([0.3, 0.7])
    s2.next_uniform()
    assert s1.counter == s2.counter == 1
    assert s1.next_uniform() == s2.next_uniform()


@pytest.mark.parametrize("weights", [[0, 0], [], [1, -1]])
def test_categorical_invalid_weights(weights):
    s = make_stream(MasterSeed(1), 0)
    with pytest.raises(InvalidDistributionError):
        s.sample_categorical(weights)


def test_permutation_is_a_permutation():
    s = make_stream(MasterSeed(4), 0)
    p = s.permutation(100)
    assert sorted(p.tolist()) == list(range(100))
