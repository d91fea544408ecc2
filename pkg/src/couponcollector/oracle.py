"""Two independent checks of the exact engine.

``simulate_collection`` plays the collection process with a seeded,
counter-based generator (see ``_philox``) so results are bit-identical
across runs and across worker counts: trial t always reads the Philox
stream keyed by (seed, trial index), regardless of scheduling.

``chain_expectation`` solves the absorbing chain over collected-type
subsets exactly. Its transition law is built by direct enumeration of
group contents (combinations, permutations, multiset patterns), sharing
no code with the avoidance-probability formulas it is used to check.
"""

import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations, combinations_with_replacement, permutations

import numpy as np

from ._bits import mask_of, types_of
from ._philox import uniform_span
from .errors import CapacityError, DivergenceError, InputError
from .models import (
    DraftLottery,
    GroupModel,
    IidWithinGroup,
    UniformDistinct,
    WeightedDistinct,
    WithoutReplacement,
)

DEFAULT_TRIALS = 100_000
DEFAULT_MAX_DRAWS = 10_000_000
CHAIN_STATE_CAP = 20

_Z95 = 1.959963984540054  # two-sided 95% normal quantile


@dataclass(frozen=True)
class SimEstimate:
    """Monte Carlo estimate of the expected number of groups."""

    mean: float
    std_error: float
    ci_low: float
    ci_high: float
    trials: int
    seed: int


@dataclass(frozen=True)
class ChainSolution:
    """Exact expected remaining groups from every collected-type state.

    ``state_values`` is indexed by the bitmask of already-collected types;
    the full-set entry is 0 and the empty-set entry is the answer.
    """

    expected_from_empty: float
    state_values: np.ndarray


def _check_collectable(model: GroupModel):
    bad = model.uncollectable_types()
    if bad:
        raise DivergenceError(
            f"type {bad[0]} never appears in any group, so the collection "
            f"cannot be completed",
            subset_mask=1 << bad[0],
        )


# Active trials advance in batches of draws; this bounds the number of
# (trial, draw) pairs processed per pass so temporaries stay modest.
_BATCH_ELEMENTS = 1 << 19
_BATCH_MAX_DRAWS = 128


def _simulate_range(
    model: GroupModel, lo: int, hi: int, seed: int, max_draws: int
) -> np.ndarray:
    """Group counts for trials lo .. hi-1, advanced in lockstep batches.

    Group draws are independent of the collected state, so a batch of
    future draws can be generated at once; a cumulative OR then locates
    each trial's completion round. Batch boundaries never affect results
    because every draw reads a fixed position of its trial's stream.
    """
    n = hi - lo
    per_draw = model.uniforms_per_group
    full = np.uint64((1 << model.m) - 1)
    trial_ids = np.arange(lo, hi, dtype=np.uint64)
    collected = np.zeros(n, dtype=np.uint64)
    draws = np.zeros(n, dtype=np.int64)
    active = np.arange(n)
    rounds_done = 0
    while active.size:
        if rounds_done >= max_draws:
            raise DivergenceError(
                f"a trial exceeded the per-trial draw limit of {max_draws}; "
                f"the collection is likely impossible to complete"
            )
        batch = max(1, min(_BATCH_MAX_DRAWS, _BATCH_ELEMENTS // active.size))
        batch = min(batch, max_draws - rounds_done)
        uniforms = uniform_span(
            seed, trial_ids[active], rounds_done * per_draw, batch * per_draw
        )
        masks = model.draw_groups(uniforms.reshape(-1, per_draw))
        masks = masks.reshape(-1, batch)
        np.bitwise_or.accumulate(masks, axis=1, out=masks)
        state = collected[active, np.newaxis] | masks
        complete = state == full
        finished = complete.any(axis=1)
        if finished.any():
            at_round = complete.argmax(axis=1)
            draws[active[finished]] = rounds_done + at_round[finished] + 1
        collected[active] = state[:, -1]
        active = active[~finished]
        rounds_done += batch
    return draws


def simulate_collection(
    model: GroupModel,
    trials: int = DEFAULT_TRIALS,
    seed: int = 0,
    workers: int = 1,
    max_draws: int = DEFAULT_MAX_DRAWS,
) -> SimEstimate:
    """Estimate the expected number of groups by repeated seeded trials.

    Identical (model, trials, seed) always yields an identical estimate;
    ``workers`` only partitions the trial range across threads and cannot
    change the result because each trial owns a fixed generator stream.
    """
    trials = int(trials)
    if trials < 1:
        raise InputError("trials must be at least 1")
    seed = int(seed)
    if not 0 <= seed < 1 << 64:
        raise InputError("seed must fit in an unsigned 64-bit integer")
    workers = max(1, int(workers))
    if workers == 1:
        draws = _simulate_range(model, 0, trials, seed, max_draws)
    else:
        bounds = [round(i * trials / workers) for i in range(workers + 1)]
        spans = [
            (lo, hi) for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo
        ]
        with ThreadPoolExecutor(max_workers=len(spans)) as pool:
            parts = list(
                pool.map(
                    lambda span: _simulate_range(model, *span, seed, max_draws),
                    spans,
                )
            )
        draws = np.concatenate(parts)
    values = draws.astype(np.float64).tolist()
    mean = math.fsum(values) / trials
    if trials > 1:
        variance = math.fsum((v - mean) ** 2 for v in values) / (trials - 1)
        std_error = math.sqrt(variance / trials)
    else:
        std_error = 0.0
    return SimEstimate(
        mean=mean,
        std_error=std_error,
        ci_low=mean - _Z95 * std_error,
        ci_high=mean + _Z95 * std_error,
        trials=trials,
        seed=seed,
    )


def _successive_sampling_weight(p, group) -> float:
    """Probability a draft lottery assembles exactly ``group``: the sum over
    orderings of the product of p[t] over the mass not yet drawn."""
    total = 0.0
    for order in permutations(group):
        prob = 1.0
        left = 1.0
        for t in order:
            prob *= p[t] / left
            left -= p[t]
            if prob == 0.0:
                break
        total += prob
    return total


def _content_distribution(model: GroupModel) -> tuple[np.ndarray, np.ndarray]:
    """Distribution of the set of types one group contains, by enumeration."""
    m, g = model.m, model.g
    weights: dict[int, float] = {}

    def add(mask: int, w: float):
        if w != 0.0:
            weights[mask] = weights.get(mask, 0.0) + w

    if isinstance(model, UniformDistinct):
        w = 1.0 / math.comb(m, g)
        for combo in combinations(range(m), g):
            add(mask_of(combo), w)
    elif isinstance(model, WeightedDistinct):
        for combo, w in zip(combinations(range(m), g), model.weights):
            add(mask_of(combo), w)
    elif isinstance(model, DraftLottery):
        for combo in combinations(range(m), g):
            add(mask_of(combo), _successive_sampling_weight(model.p, combo))
    elif isinstance(model, IidWithinGroup):
        g_factorial = math.factorial(g)
        for pattern in combinations_with_replacement(range(m), g):
            counts = Counter(pattern)
            coeff = g_factorial
            prob = 1.0
            for t, c in counts.items():
                coeff //= math.factorial(c)
                prob *= model.p[t] ** c
            add(mask_of(counts), coeff * prob)
    elif isinstance(model, WithoutReplacement):
        pop = model.population.counts
        denom = math.comb(model.population.total, g)
        for pattern in combinations_with_replacement(range(m), g):
            counts = Counter(pattern)
            if any(c > pop[t] for t, c in counts.items()):
                continue
            ways = 1
            for t, c in counts.items():
                ways *= math.comb(pop[t], c)
            add(mask_of(counts), ways / denom)
    else:  # pragma: no cover - new variants must add an enumeration
        raise InputError(f"no content enumeration for {type(model).__name__}")

    masks = np.array(list(weights.keys()), dtype=np.int64)
    return masks, np.array(list(weights.values()), dtype=np.float64)


def chain_expectation(model: GroupModel) -> ChainSolution:
    """Expected groups to finish, solved exactly over collected-set states.

    Works backward from the full set: with P_stay the chance a group adds
    nothing new, E(C) = (1 + sum of P(C -> C') E(C')) / (1 - P_stay(C)).
    """
    m = model.m
    if m > CHAIN_STATE_CAP:
        raise CapacityError(
            f"m={m} exceeds the chain-solver cap of {CHAIN_STATE_CAP} "
            f"(2**m states)"
        )
    _check_collectable(model)
    content_masks, content_weights = _content_distribution(model)
    full = (1 << m) - 1
    values = np.zeros(1 << m)
    for state in sorted(range(full), key=lambda s: s.bit_count(), reverse=True):
        landed = np.bitwise_or(content_masks, state)
        stays = landed == state
        p_stay = float(content_weights[stays].sum())
        escape = 1.0 - p_stay
        if escape <= 0.0:
            raise DivergenceError(
                f"no group can add a type outside {types_of(state)}",
                subset_mask=full ^ state,
            )
        moved = ~stays
        acc = 1.0 + float((content_weights[moved] * values[landed[moved]]).sum())
        values[state] = acc / escape
    return ChainSolution(expected_from_empty=float(values[0]), state_values=values)
