"""RNG streams: keying, draw mappings, and word-consumption contract."""

import numpy as np
import pytest

from pflopt.rng import RngStream, substream_key


def philox_words(seed, *path, count):
    """Independent oracle: the raw keystream of the documented Philox keying."""
    key = np.array(substream_key(seed, *path), dtype=np.uint64)
    return np.random.Philox(key=key).random_raw(count)


def test_equal_seeds_bitwise_equal_sequences():
    a, b = RngStream(123, "x", 4), RngStream(123, "x", 4)
    seq_a = [a.uniform(), a.normal(), a.randint(10), a.coin(0.5),
             tuple(a.uniform(size=5)), tuple(a.normal(size=3))]
    seq_b = [b.uniform(), b.normal(), b.randint(10), b.coin(0.5),
             tuple(b.uniform(size=5)), tuple(b.normal(size=3))]
    assert seq_a == seq_b


def test_distinct_paths_are_distinct_streams():
    draws = {
        tuple(RngStream(5, *path).uniform(size=4))
        for path in [(), ("a",), ("b",), (0,), (1,), ("a", 0), (0, "a")]
    }
    assert len(draws) == 7


def test_path_int_str_not_conflated():
    assert substream_key(9, 7) != substream_key(9, "7")


def test_uniform_matches_raw_word_mapping():
    words = philox_words(77, "u", count=64)
    expected = (words >> np.uint64(11)).astype(np.float64) * 2.0**-53
    stream = RngStream(77, "u")
    got = stream.uniform(size=64)
    assert np.array_equal(got, expected)
    assert np.all((got >= 0) & (got < 1))


def test_scalar_and_array_uniform_consume_identically():
    a, b = RngStream(3, "s"), RngStream(3, "s")
    assert [a.uniform() for _ in range(1500)] == list(b.uniform(size=1500))


def test_uniform_low_high():
    u = RngStream(4).uniform(size=1000, low=-2.0, high=3.0)
    assert np.all((u >= -2.0) & (u < 3.0))


def test_normal_is_box_muller_on_word_pairs():
    words = philox_words(21, "n", count=4)
    u = (words >> np.uint64(11)).astype(np.float64) * 2.0**-53
    u1, u2 = u[0::2] + 2.0**-53, u[1::2]
    r = np.sqrt(-2.0 * np.log(u1))
    theta = 2.0 * np.pi * u2
    expected = np.empty(4)
    expected[0::2] = r * np.cos(theta)
    expected[1::2] = r * np.sin(theta)
    got = RngStream(21, "n").normal(size=4)
    assert np.array_equal(got, expected)


def test_normal_odd_size_discards_spare_half_pair():
    # size=3 consumes 4 raw words; the next uniform must be word index 4.
    words = philox_words(22, count=8)
    stream = RngStream(22)
    stream.normal(size=3)
    expected = (int(words[4]) >> 11) * 2.0**-53
    assert stream.uniform() == expected


def test_normal_moments():
    z = RngStream(1, "mc").normal(size=100_000)
    assert abs(z.mean()) < 4.0 / np.sqrt(z.size)  # 4 standard errors
    assert abs(z.var() - 1.0) < 0.02


def test_normal_loc_scale():
    z = RngStream(2).normal(size=50_000, loc=3.0, scale=0.5)
    assert abs(z.mean() - 3.0) < 0.02
    assert abs(z.std() - 0.5) < 0.01


def test_bernoulli_degenerate_p():
    stream = RngStream(8)
    assert not np.any(stream.bernoulli(0.0, size=200))
    assert np.all(stream.bernoulli(1.0, size=200))


def test_bernoulli_array_p_uses_one_uniform_each():
    p = np.array([0.0, 1.0, 0.0, 1.0])
    out = RngStream(9).bernoulli(p, size=4)
    assert out.tolist() == [0, 1, 0, 1]


def test_randint_bounds_and_coverage():
    draws = RngStream(10).randint(7, size=10_000)
    assert draws.min() == 0 and draws.max() == 6
    assert set(np.unique(draws)) == set(range(7))


def test_randint_n1_and_validation():
    stream = RngStream(11)
    assert np.all(stream.randint(1, size=50) == 0)
    with pytest.raises(ValueError):
        stream.randint(0)


def test_randint_scalar_matches_array_path():
    a, b = RngStream(12), RngStream(12)
    assert [a.randint(100) for _ in range(1200)] == list(b.randint(100, size=1200))


def test_coin_consumes_one_word():
    words = philox_words(13, count=3)
    u = (words >> np.uint64(11)).astype(np.float64) * 2.0**-53
    stream = RngStream(13)
    assert stream.coin(0.5) == (u[0] < 0.5)
    assert stream.coin(0.5) == (u[1] < 0.5)
    assert stream.uniform() == u[2]


def test_buffer_refill_is_seamless():
    # Cross the internal 1024-word buffer boundary with mixed draw sizes.
    stream = RngStream(14, "big")
    got = np.concatenate([stream.uniform(size=1000), stream.uniform(size=100)])
    words = philox_words(14, "big", count=1100)
    expected = (words >> np.uint64(11)).astype(np.float64) * 2.0**-53
    assert np.array_equal(got, expected)


def test_path_type_validation():
    with pytest.raises(TypeError):
        RngStream(1, 1.5)
