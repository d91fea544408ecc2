"""Sampling: drawn groups must follow each model's law, reproducibly."""

import math
from collections import Counter

import numpy as np
import pytest

from couponcollector import (
    DraftLottery,
    IidWithinGroup,
    Population,
    UniformDistinct,
    WeightedDistinct,
    WithoutReplacement,
    sample_group,
)
from couponcollector._philox import uniform_span
from conftest import random_model


def _draws(model, seed, n):
    uniforms = uniform_span(
        seed, np.arange(n, dtype=np.uint64), 0, model.uniforms_per_group
    )
    return model.draw_groups(uniforms)


def test_degenerate_iid_always_first_type():
    model = IidWithinGroup((1.0, 0.0, 0.0), 4)
    masks = _draws(model, seed=1, n=2000)
    assert np.all(masks == 1)


def test_uniform_distinct_pairs_equally_likely():
    model = UniformDistinct(3, 2)
    freq = Counter(_draws(model, seed=9, n=60_000).tolist())
    assert sorted(freq) == [0b011, 0b101, 0b110]
    sigma = math.sqrt((1 / 3) * (2 / 3) / 60_000)
    for count in freq.values():
        assert abs(count / 60_000 - 1 / 3) < 3 * sigma


def test_without_replacement_unit_counts_pairs_equally_likely():
    # brute force over ordered draws: each of the 6 ordered pairs from 3
    # individuals is equally likely, so each unordered pair has mass 1/3
    model = WithoutReplacement(Population((1, 1, 1)), 2)
    freq = Counter(_draws(model, seed=7, n=60_000).tolist())
    sigma = math.sqrt((1 / 3) * (2 / 3) / 60_000)
    for count in freq.values():
        assert abs(count / 60_000 - 1 / 3) < 3 * sigma


@pytest.mark.parametrize(
    "model",
    [
        WithoutReplacement(Population((1, 3, 10, 40)), 3),
        WithoutReplacement(Population((10, 100, 500, 1000)), 2),
        UniformDistinct(5, 3),
        IidWithinGroup((0.5, 0.3, 0.15, 0.05), 3),
        DraftLottery((0.5, 0.25, 0.15, 0.1), 2),
        WeightedDistinct(4, 2, (0.3, 0.05, 0.15, 0.2, 0.1, 0.2)),
    ],
    ids=lambda m: m.describe(),
)
def test_empirical_avoidance_matches_exact(model):
    n = 200_000
    masks = _draws(model, seed=13, n=n)
    for subset in range(1, 1 << model.m):
        q = model.avoidance_probability(subset)
        freq = float(np.mean((masks & np.uint64(subset)) == 0))
        se = math.sqrt(max(q * (1 - q), 1e-12) / n)
        assert abs(freq - q) <= 3 * se, (subset, freq, q)


def test_group_sizes_are_correct():
    rng = np.random.default_rng(2)
    for _ in range(20):
        model = random_model(rng, max_m=6)
        masks = _draws(model, seed=int(rng.integers(0, 2**32)), n=500)
        sizes = np.array([int(mm).bit_count() for mm in masks])
        if isinstance(model, IidWithinGroup):
            assert np.all((1 <= sizes) & (sizes <= model.g))
        elif isinstance(model, WithoutReplacement):
            assert np.all((1 <= sizes) & (sizes <= min(model.g, model.m)))
        else:
            assert np.all(sizes == model.g)


def test_sample_group_matches_vectorized_stream():
    # a sequential consumer of trial 5's stream reproduces the vectorized draws
    model = DraftLottery((0.5, 0.25, 0.15, 0.1), 2)
    rng = np.random.Generator(np.random.Philox(key=99, counter=[0, 0, 5, 0]))
    scalar = [sample_group(model, rng) for _ in range(50)]
    uniforms = uniform_span(99, np.array([5], dtype=np.uint64), 0, 100)
    vectorized = model.draw_groups(uniforms.reshape(50, 2))
    assert scalar == [int(v) for v in vectorized]


def test_sample_group_is_deterministic():
    model = WithoutReplacement(Population((2, 3, 4)), 2)
    a = [sample_group(model, np.random.Generator(np.random.Philox(key=3))) for _ in [0]]
    b = [sample_group(model, np.random.Generator(np.random.Philox(key=3))) for _ in [0]]
    assert a == b
