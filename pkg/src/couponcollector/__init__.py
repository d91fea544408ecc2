"""Expected completion times for coupon collection with group arrivals.

Exact values come from an inclusion-exclusion sum over type subsets
driven by per-model avoidance probabilities; two independent oracles (a
seeded Monte Carlo simulator and an absorbing-chain solver) verify them.
"""

from .engine import (
    DEFAULT_EXACT_CAP,
    ExpectationResult,
    first_occurrence_expectation,
    inclusion_exclusion_expectation,
    sampling_expectation,
    single_arrival_expectation,
    uniform_group_expectation,
    uniform_single_expectation,
)
from .errors import CapacityError, CouponCollectorError, DivergenceError, InputError
from .models import (
    DraftLottery,
    GroupModel,
    IidWithinGroup,
    Population,
    UniformDistinct,
    WeightedDistinct,
    WithoutReplacement,
    avoidance_probability,
    load_model,
    mandelbrot_weights,
    model_from_dict,
    population_from_weights,
    sample_group,
)
from .oracle import (
    ChainSolution,
    SimEstimate,
    chain_expectation,
    simulate_collection,
)

__all__ = [
    "CapacityError",
    "ChainSolution",
    "CouponCollectorError",
    "DEFAULT_EXACT_CAP",
    "DivergenceError",
    "DraftLottery",
    "ExpectationResult",
    "GroupModel",
    "IidWithinGroup",
    "InputError",
    "Population",
    "SimEstimate",
    "UniformDistinct",
    "WeightedDistinct",
    "WithoutReplacement",
    "avoidance_probability",
    "chain_expectation",
    "first_occurrence_expectation",
    "inclusion_exclusion_expectation",
    "load_model",
    "mandelbrot_weights",
    "model_from_dict",
    "population_from_weights",
    "sample_group",
    "sampling_expectation",
    "simulate_collection",
    "single_arrival_expectation",
    "uniform_group_expectation",
    "uniform_single_expectation",
]

__version__ = "0.1.0"
