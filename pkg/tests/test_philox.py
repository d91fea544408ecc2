"""The documented generator contract: our vectorized Philox4x64-10 must
emit exactly the streams of numpy.random.Philox(key=seed, counter=[0,0,t,0])."""

import numpy as np

from couponcollector._philox import philox_words, uniform_span


def _numpy_stream(seed, trial, count):
    bg = np.random.Philox(key=seed, counter=[0, 0, trial, 0])
    return np.random.Generator(bg).random(count)


def test_words_match_numpy_raw_output():
    gen = np.random.Generator(np.random.Philox(key=5, counter=0))
    reference = gen.integers(0, 2**64, size=12, dtype=np.uint64)
    ours = philox_words(5, np.array([1, 2, 3]), np.array([0])).reshape(-1)
    assert np.array_equal(ours, reference)


def test_uniforms_match_numpy_generator():
    for seed, trial in [(0, 0), (42, 3), (2**63 + 11, 12345)]:
        want = _numpy_stream(seed, trial, 23)
        got = uniform_span(seed, np.array([trial], dtype=np.uint64), 0, 23)[0]
        assert np.array_equal(got, want)


def test_uniform_span_is_positional():
    # reading [7, 12) must equal positions 7..11 of a sequential consumer
    want = _numpy_stream(9, 4, 12)[7:]
    got = uniform_span(9, np.array([4], dtype=np.uint64), 7, 5)[0]
    assert np.array_equal(got, want)


def test_streams_vectorize_across_trials():
    trials = np.array([0, 1, 5, 1000, 2**40], dtype=np.uint64)
    block = uniform_span(77, trials, 3, 9)
    for row, trial in enumerate(trials):
        assert np.array_equal(block[row], _numpy_stream(77, int(trial), 12)[3:])


def test_distinct_trials_give_distinct_streams():
    a = uniform_span(1, np.array([0], dtype=np.uint64), 0, 8)
    b = uniform_span(1, np.array([1], dtype=np.uint64), 0, 8)
    assert not np.array_equal(a, b)
