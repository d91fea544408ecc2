"""Populations and group-arrival distributions.

A collection has m coupon types, indexed 0 .. m-1. Coupons arrive in
groups of constant size g, and five group distributions are supported:

- ``UniformDistinct``: every g-subset of types is equally likely.
- ``WeightedDistinct``: an explicit probability for each g-subset, indexed
  in lexicographic order of the sorted type tuples.
- ``IidWithinGroup``: each of the g slots is an independent draw from a
  probability vector p over types, so a group may repeat types.
- ``WithoutReplacement``: g individuals drawn without replacement from a
  finite population with per-type counts; the group is the multiset of
  their types (multivariate hypergeometric contents).
- ``DraftLottery``: types drawn sequentially in proportion to p with
  duplicates discarded until g distinct types are assembled (successive
  sampling of types).

Every model answers the same query: the avoidance probability q(S), the
chance that a single drawn group contains no type from the subset S. All
model values are immutable after construction; sampling takes an explicit
caller-owned random generator.
"""

import json
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations

import numpy as np

from ._bits import mask_of, popcounts, subset_sums, subset_zeta, types_of
from .errors import InputError

PROB_SUM_TOLERANCE = 1e-9
DRAFT_MAX_GROUP_SIZE = 8


def _validated_probabilities(values, name: str) -> tuple[float, ...]:
    """Check a probability vector and renormalize it to sum exactly ~1."""
    vec = tuple(float(v) for v in values)
    if len(vec) == 0:
        raise InputError(f"{name} must not be empty")
    if any(v < 0.0 or not math.isfinite(v) for v in vec):
        raise InputError(f"{name} entries must be finite and nonnegative")
    total = math.fsum(vec)
    if abs(total - 1.0) > PROB_SUM_TOLERANCE:
        raise InputError(
            f"{name} must sum to 1 within {PROB_SUM_TOLERANCE} (got {total!r})"
        )
    return tuple(v / total for v in vec)


@dataclass(frozen=True)
class Population:
    """A finite population of ``m`` types with ``counts[i]`` individuals each."""

    counts: tuple[int, ...]

    def __post_init__(self):
        counts = tuple(int(c) for c in self.counts)
        if len(counts) == 0:
            raise InputError("population needs at least one type")
        if any(c < 1 for c in counts):
            raise InputError("every type needs at least one individual")
        object.__setattr__(self, "counts", counts)

    @property
    def m(self) -> int:
        return len(self.counts)

    @property
    def total(self) -> int:
        return sum(self.counts)

    def proportions(self) -> tuple[float, ...]:
        n = self.total
        return tuple(c / n for c in self.counts)


class GroupModel(ABC):
    """Common interface of the five group-arrival distributions."""

    m: int
    g: int

    def _check_mask(self, subset_mask: int) -> int:
        subset_mask = int(subset_mask)
        if not 0 <= subset_mask < (1 << self.m):
            raise InputError(
                f"subset mask {subset_mask:#x} out of range for m={self.m}"
            )
        return subset_mask

    @abstractmethod
    def avoidance_probability(self, subset_mask: int) -> float:
        """Probability that one drawn group contains no type in the subset."""

    @abstractmethod
    def avoidance_table(self) -> np.ndarray:
        """q(S) for every subset S, as an array of length 2**m indexed by mask."""

    @abstractmethod
    def uncollectable_types(self) -> tuple[int, ...]:
        """Types that no group can ever contain (q({i}) = 1 exactly)."""

    @property
    @abstractmethod
    def uniforms_per_group(self) -> int:
        """How many uniform doubles one group draw consumes (a fixed constant)."""

    @abstractmethod
    def draw_groups(self, uniforms: np.ndarray) -> np.ndarray:
        """Map uniforms of shape (n, uniforms_per_group) to n group masks.

        This is the pinned sampling algorithm: the group is a pure function
        of the supplied uniforms, so any source producing the same uniforms
        reproduces the same groups.
        """

    @abstractmethod
    def describe(self) -> str:
        """One-line human-readable description."""


def _weighted_removal_masks(
    uniforms: np.ndarray, base_weights: np.ndarray
) -> np.ndarray:
    """Draw g distinct indices sequentially in proportion to a weight vector.

    Step j picks the first index whose cumulative remaining weight exceeds
    u_j times the total remaining weight, then zeroes that index's weight.
    Returns the bitmask of drawn indices per row of uniforms.
    """
    n, g = uniforms.shape
    weights = np.tile(base_weights, (n, 1))
    masks = np.zeros(n, dtype=np.uint64)
    rows = np.arange(n)
    for j in range(g):
        cum = np.cumsum(weights, axis=1)
        target = uniforms[:, j] * cum[:, -1]
        idx = (target[:, None] < cum).argmax(axis=1)
        masks |= np.uint64(1) << idx.astype(np.uint64)
        weights[rows, idx] = 0.0
    return masks


def _ranked_urn_masks(uniforms: np.ndarray, cum_counts: np.ndarray) -> np.ndarray:
    """Draw g individuals without replacement from an urn of integer counts.

    Individuals carry absolute positions 0 .. N-1, ordered by type. Step j
    picks position rank floor(u_j * (N - j)) among the individuals still
    present; the rank is mapped to an absolute position by stepping over
    the positions already drawn (in increasing order), and the position is
    mapped to its type through the cumulative counts. Returns the bitmask
    of drawn types per row of uniforms.
    """
    n, g = uniforms.shape
    total = int(cum_counts[-1])
    masks = np.zeros(n, dtype=np.uint64)
    taken = np.empty((n, g), dtype=np.int64)
    for j in range(g):
        rank = (uniforms[:, j] * (total - j)).astype(np.int64)
        np.minimum(rank, total - j - 1, out=rank)
        position = rank
        if j:
            earlier = np.sort(taken[:, :j], axis=1)
            for k in range(j):
                position = position + (position >= earlier[:, k])
        taken[:, j] = position
        types = np.searchsorted(cum_counts, position, side="right")
        masks |= np.uint64(1) << types.astype(np.uint64)
    return masks


@dataclass(frozen=True)
class UniformDistinct(GroupModel):
    """All C(m, g) distinct-type groups equally likely."""

    m: int
    g: int

    def __post_init__(self):
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "g", int(self.g))
        if self.m < 1:
            raise InputError("m must be at least 1")
        if not 1 <= self.g < self.m:
            raise InputError(
                f"distinct-type groups need 1 <= g < m (got g={self.g}, m={self.m})"
            )

    def avoidance_probability(self, subset_mask: int) -> float:
        k = self._check_mask(subset_mask).bit_count()
        return math.comb(self.m - k, self.g) / math.comb(self.m, self.g)

    def avoidance_table(self) -> np.ndarray:
        per_size = np.array(
            [
                math.comb(self.m - k, self.g) / math.comb(self.m, self.g)
                for k in range(self.m + 1)
            ]
        )
        return per_size[popcounts(self.m)]

    def uncollectable_types(self) -> tuple[int, ...]:
        return ()

    @property
    def uniforms_per_group(self) -> int:
        return self.g

    @cached_property
    def _unit_cum_counts(self) -> np.ndarray:
        return np.arange(1, self.m + 1, dtype=np.int64)

    def draw_groups(self, uniforms: np.ndarray) -> np.ndarray:
        return _ranked_urn_masks(uniforms, self._unit_cum_counts)

    def describe(self) -> str:
        return f"uniform_distinct(m={self.m}, g={self.g})"


@dataclass(frozen=True)
class WeightedDistinct(GroupModel):
    """Distinct-type groups with explicit per-group probabilities.

    ``weights[i]`` is the probability of the i-th g-subset of types in
    lexicographic order of the sorted type tuples, e.g. for m=4, g=2:
    (0,1), (0,2), (0,3), (1,2), (1,3), (2,3).
    """

    m: int
    g: int
    weights: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "g", int(self.g))
        if self.m < 1:
            raise InputError("m must be at least 1")
        if not 1 <= self.g < self.m:
            raise InputError(
                f"distinct-type groups need 1 <= g < m (got g={self.g}, m={self.m})"
            )
        expected = math.comb(self.m, self.g)
        if len(self.weights) != expected:
            raise InputError(
                f"weighted_distinct needs C({self.m},{self.g}) = {expected} "
                f"group weights, got {len(self.weights)}"
            )
        object.__setattr__(
            self, "weights", _validated_probabilities(self.weights, "group weights")
        )

    @cached_property
    def _group_masks(self) -> np.ndarray:
        return np.array(
            [mask_of(c) for c in combinations(range(self.m), self.g)], dtype=np.int64
        )

    @cached_property
    def _weights_array(self) -> np.ndarray:
        return np.asarray(self.weights, dtype=np.float64)

    @cached_property
    def _cum_weights(self) -> np.ndarray:
        return np.cumsum(self._weights_array)

    def avoidance_probability(self, subset_mask: int) -> float:
        subset_mask = self._check_mask(subset_mask)
        if subset_mask == 0:
            return 1.0  # every group avoids nothing
        total = math.fsum(
            w
            for gm, w in zip(self._group_masks.tolist(), self.weights)
            if gm & subset_mask == 0
        )
        return min(1.0, total)

    def avoidance_table(self) -> np.ndarray:
        lattice = np.zeros(1 << self.m)
        np.add.at(lattice, self._group_masks, self._weights_array)
        contained = subset_zeta(lattice)
        # q(S) = total weight of groups inside the complement of S
        table = np.clip(contained[::-1], 0.0, 1.0)
        table[0] = 1.0
        return table

    def uncollectable_types(self) -> tuple[int, ...]:
        covered = 0
        for gm, w in zip(self._group_masks.tolist(), self.weights):
            if w > 0.0:
                covered |= gm
        return tuple(i for i in range(self.m) if not covered & (1 << i))

    @property
    def uniforms_per_group(self) -> int:
        return 1

    def draw_groups(self, uniforms: np.ndarray) -> np.ndarray:
        cum = self._cum_weights
        target = uniforms[:, 0] * cum[-1]
        idx = np.searchsorted(cum, target, side="right")
        idx = np.minimum(idx, len(cum) - 1)
        return self._group_masks[idx].astype(np.uint64)

    def describe(self) -> str:
        return f"weighted_distinct(m={self.m}, g={self.g})"


@dataclass(frozen=True)
class IidWithinGroup(GroupModel):
    """Each of the g slots independently equals type k with probability p[k]."""

    p: tuple[float, ...]
    g: int

    def __post_init__(self):
        object.__setattr__(self, "g", int(self.g))
        object.__setattr__(
            self, "p", _validated_probabilities(self.p, "type probabilities")
        )
        if self.g < 1:
            raise InputError("group size g must be at least 1")

    @property
    def m(self) -> int:
        return len(self.p)

    def avoidance_probability(self, subset_mask: int) -> float:
        subset_mask = self._check_mask(subset_mask)
        hit = math.fsum(self.p[i] for i in types_of(subset_mask))
        return max(0.0, 1.0 - hit) ** self.g

    def avoidance_table(self) -> np.ndarray:
        remaining = np.clip(1.0 - subset_sums(self.p), 0.0, None)
        return remaining**self.g

    def uncollectable_types(self) -> tuple[int, ...]:
        return tuple(i for i, pi in enumerate(self.p) if pi == 0.0)

    @property
    def uniforms_per_group(self) -> int:
        return self.g

    @cached_property
    def _cum_p(self) -> np.ndarray:
        return np.cumsum(np.asarray(self.p, dtype=np.float64))

    def draw_groups(self, uniforms: np.ndarray) -> np.ndarray:
        cum = self._cum_p
        idx = np.searchsorted(cum, uniforms.reshape(-1) * cum[-1], side="right")
        idx = np.minimum(idx, self.m - 1).reshape(uniforms.shape).astype(np.uint64)
        return np.bitwise_or.reduce(np.uint64(1) << idx, axis=1)

    def describe(self) -> str:
        return f"iid_within_group(m={self.m}, g={self.g})"


@dataclass(frozen=True)
class WithoutReplacement(GroupModel):
    """g individuals drawn without replacement from a finite population."""

    population: Population
    g: int

    def __post_init__(self):
        if not isinstance(self.population, Population):
            object.__setattr__(self, "population", Population(tuple(self.population)))
        object.__setattr__(self, "g", int(self.g))
        if not 1 <= self.g <= self.population.total:
            raise InputError(
                f"sample size g must satisfy 1 <= g <= N={self.population.total} "
                f"(got g={self.g})"
            )

    @property
    def m(self) -> int:
        return self.population.m

    def avoidance_probability(self, subset_mask: int) -> float:
        subset_mask = self._check_mask(subset_mask)
        total = self.population.total
        excluded = sum(self.population.counts[i] for i in types_of(subset_mask))
        # falling-factorial ratio P(N - excluded, g) / P(N, g); exact integers
        return math.perm(total - excluded, self.g) / math.perm(total, self.g)

    def avoidance_table(self) -> np.ndarray:
        total = self.population.total
        remaining = total - subset_sums(self.population.counts)
        table = np.ones_like(remaining)
        for j in range(self.g):
            table *= np.maximum(remaining - j, 0.0) / (total - j)
        return table

    def uncollectable_types(self) -> tuple[int, ...]:
        return ()

    @property
    def uniforms_per_group(self) -> int:
        return self.g

    @cached_property
    def _cum_counts(self) -> np.ndarray:
        return np.cumsum(np.asarray(self.population.counts, dtype=np.int64))

    def draw_groups(self, uniforms: np.ndarray) -> np.ndarray:
        return _ranked_urn_masks(uniforms, self._cum_counts)

    def describe(self) -> str:
        return f"without_replacement(counts={self.population.counts}, g={self.g})"


@dataclass(frozen=True)
class DraftLottery(GroupModel):
    """Sequential weighted type draws, duplicates discarded, until g distinct.

    The chance that the assembled group equals a set G is the sum over
    orderings (t_1, .., t_g) of G of prod_j p[t_j] / (1 - p[t_1] - .. -
    p[t_{j-1}]), the successive-sampling law.
    """

    p: tuple[float, ...]
    g: int

    def __post_init__(self):
        object.__setattr__(self, "g", int(self.g))
        object.__setattr__(
            self, "p", _validated_probabilities(self.p, "type probabilities")
        )
        if not 1 <= self.g < self.m:
            raise InputError(
                f"distinct-type groups need 1 <= g < m (got g={self.g}, m={self.m})"
            )
        if self.g > DRAFT_MAX_GROUP_SIZE:
            raise InputError(
                f"draft lottery supports g <= {DRAFT_MAX_GROUP_SIZE} "
                f"(exact group weights are enumerated)"
            )
        support = sum(1 for v in self.p if v > 0.0)
        if support < self.g:
            raise InputError(
                f"draft lottery needs at least g={self.g} types with positive "
                f"probability (got {support})"
            )

    @property
    def m(self) -> int:
        return len(self.p)

    @cached_property
    def _group_weights(self) -> tuple[np.ndarray, np.ndarray]:
        """(masks, weights) of every g-subset under the successive-sampling law.

        Built by a lattice recursion on prefix sets: the probability W(A)
        that the first |A| distinct types are exactly A satisfies
        W(A) = sum over t in A of W(A - {t}) * p[t] / (1 - mass(A - {t})).
        """
        m, g = self.m, self.g
        p = np.asarray(self.p, dtype=np.float64)
        mass = subset_sums(p)
        prefix = np.zeros(1 << m)
        prefix[0] = 1.0
        for k in range(1, g + 1):
            masks_k = np.array(
                [mask_of(c) for c in combinations(range(m), k)], dtype=np.int64
            )
            acc = np.zeros(len(masks_k))
            for b in range(m):
                if p[b] == 0.0:
                    continue
                bit = 1 << b
                sel = (masks_k & bit) != 0
                if not sel.any():
                    continue
                before = masks_k[sel] ^ bit
                left = 1.0 - mass[before]
                ratio = np.where(left > 0.0, p[b] / np.where(left > 0.0, left, 1.0), 0.0)
                acc[sel] += prefix[before] * ratio
            prefix[masks_k] = acc
        group_masks = np.array(
            [mask_of(c) for c in combinations(range(m), g)], dtype=np.int64
        )
        group_weights = prefix[group_masks]
        # the recursion accumulates rounding of order ulp; renormalize so
        # the group law carries total mass 1
        return group_masks, group_weights / math.fsum(group_weights.tolist())

    def avoidance_probability(self, subset_mask: int) -> float:
        subset_mask = self._check_mask(subset_mask)
        if subset_mask == 0:
            return 1.0  # every group avoids nothing
        masks, weights = self._group_weights
        return min(1.0, float(weights[(masks & subset_mask) == 0].sum()))

    def avoidance_table(self) -> np.ndarray:
        masks, weights = self._group_weights
        lattice = np.zeros(1 << self.m)
        np.add.at(lattice, masks, weights)
        contained = subset_zeta(lattice)
        table = np.clip(contained[::-1], 0.0, 1.0)
        table[0] = 1.0
        return table

    def uncollectable_types(self) -> tuple[int, ...]:
        return tuple(i for i, pi in enumerate(self.p) if pi == 0.0)

    @property
    def uniforms_per_group(self) -> int:
        return self.g

    @cached_property
    def _p_array(self) -> np.ndarray:
        return np.asarray(self.p, dtype=np.float64)

    def draw_groups(self, uniforms: np.ndarray) -> np.ndarray:
        return _weighted_removal_masks(uniforms, self._p_array)

    def describe(self) -> str:
        return f"draft_lottery(m={self.m}, g={self.g})"


def avoidance_probability(model: GroupModel, subset_mask: int) -> float:
    """Probability that one group drawn from ``model`` avoids every type in S."""
    return model.avoidance_probability(subset_mask)


def sample_group(model: GroupModel, rng: np.random.Generator) -> int:
    """Draw one group and return the bitmask of types it contains.

    Consumes exactly ``model.uniforms_per_group`` doubles from ``rng``,
    so a caller holding a Philox stream reproduces the simulator's draws.
    """
    uniforms = rng.random(model.uniforms_per_group)[np.newaxis, :]
    return int(model.draw_groups(uniforms)[0])


def mandelbrot_weights(m: int, c: float, theta: float) -> tuple[float, ...]:
    """Zipf-Mandelbrot probabilities p_i proportional to (c + i)**(-theta).

    Ranks i run 1 .. m, so the entries are strictly decreasing.
    """
    m = int(m)
    if m < 1:
        raise InputError("m must be at least 1")
    c = float(c)
    theta = float(theta)
    if c < 0.0 or not math.isfinite(c):
        raise InputError("offset c must be a finite nonnegative real")
    if not 1.0 <= theta <= 2.0:
        raise InputError(f"exponent theta must lie in [1, 2] (got {theta})")
    raw = [(c + i) ** (-theta) for i in range(1, m + 1)]
    total = math.fsum(raw)
    return tuple(w / total for w in raw)


def population_from_weights(p, total: int) -> Population:
    """Integer population of size ``total`` approximating proportions ``p``.

    Each type gets max(1, round(total * p_i)) individuals, then a
    largest-remainder adjustment moves single individuals until the counts
    sum to ``total`` exactly, never dropping a type below 1.
    """
    p = _validated_probabilities(p, "proportions")
    total = int(total)
    m = len(p)
    if total < m:
        raise InputError(
            f"population size {total} cannot give each of {m} types an individual"
        )
    quota = [total * pi for pi in p]
    counts = [max(1, round(q)) for q in quota]
    shortfall = total - sum(counts)
    while shortfall > 0:
        i = max(range(m), key=lambda i: (quota[i] - counts[i], -i))
        counts[i] += 1
        shortfall -= 1
    while shortfall < 0:
        adjustable = [i for i in range(m) if counts[i] > 1]
        i = max(adjustable, key=lambda i: (counts[i] - quota[i], -i))
        counts[i] -= 1
        shortfall += 1
    return Population(tuple(counts))


_VARIANTS = (
    "uniform_distinct",
    "weighted_distinct",
    "iid_within_group",
    "without_replacement",
    "draft_lottery",
)


def _weighted_m_from_length(length: int, g: int) -> int:
    m = g + 1
    while math.comb(m, g) < length:
        m += 1
    if math.comb(m, g) != length:
        raise InputError(
            f"a weight vector of length {length} does not match C(m, {g}) for any m"
        )
    return m


def model_from_dict(obj) -> GroupModel:
    """Build a model from the JSON input-file schema.

    Expected shape: ``{"model": <variant>, "g": int, ...payload...}`` where
    the payload is ``"counts"`` (without_replacement), ``"p"``
    (iid_within_group, draft_lottery), ``"q"`` (weighted_distinct), ``"m"``
    (uniform_distinct), or ``"mandelbrot": {"m", "c", "theta", "N"}`` which
    expands to a population (without_replacement) or a probability vector.
    """
    if not isinstance(obj, dict):
        raise InputError("model specification must be a JSON object")
    variant = obj.get("model")
    if variant not in _VARIANTS:
        raise InputError(
            f"unknown model {variant!r}; expected one of {', '.join(_VARIANTS)}"
        )
    if "g" not in obj:
        raise InputError("model specification requires integer field 'g'")
    try:
        g = int(obj["g"])
    except (TypeError, ValueError):
        raise InputError(f"field 'g' must be an integer (got {obj['g']!r})") from None

    mandel = obj.get("mandelbrot")
    weights = None
    mandel_total = None
    if mandel is not None:
        if not isinstance(mandel, dict) or not {"m", "c", "theta"} <= set(mandel):
            raise InputError(
                "field 'mandelbrot' must be an object with keys m, c, theta"
                " (and N for population models)"
            )
        weights = mandelbrot_weights(mandel["m"], mandel["c"], mandel["theta"])
        if "N" in mandel:
            mandel_total = int(mandel["N"])

    if variant == "uniform_distinct":
        if "m" not in obj:
            raise InputError("uniform_distinct requires integer field 'm'")
        return UniformDistinct(int(obj["m"]), g)
    if variant == "weighted_distinct":
        if "q" not in obj:
            raise InputError("weighted_distinct requires field 'q' (group weights)")
        q = obj["q"]
        m = _weighted_m_from_length(len(q), g)
        return WeightedDistinct(m, g, tuple(q))
    if variant == "without_replacement":
        if "counts" in obj:
            return WithoutReplacement(Population(tuple(obj["counts"])), g)
        if weights is not None:
            if mandel_total is None:
                raise InputError(
                    "without_replacement with 'mandelbrot' requires mandelbrot.N"
                )
            return WithoutReplacement(
                population_from_weights(weights, mandel_total), g
            )
        raise InputError("without_replacement requires 'counts' or 'mandelbrot'")
    # remaining variants take a probability vector over types
    if "p" in obj:
        p = tuple(obj["p"])
    elif weights is not None:
        p = weights
    else:
        raise InputError(f"{variant} requires 'p' or 'mandelbrot'")
    if variant == "iid_within_group":
        return IidWithinGroup(p, g)
    return DraftLottery(p, g)


def load_model(path) -> GroupModel:
    """Read a model from a JSON file (see :func:`model_from_dict`)."""
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON in {path}: {exc}") from exc
    return model_from_dict(obj)
