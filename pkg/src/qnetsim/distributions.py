"""Seeded random variate generation.

Every family draws non-negative durations from a single uniform stream, so a
whole simulation run is reproducible from its seed alone.  Families with a
closed-form inverse CDF (Uniform, Triangular, Exponential, Weibull) consume
exactly one uniform per sample; Deterministic and Sequential consume none.
The reproducibility contract is per library version, not across libraries.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Callable, Sequence

__all__ = [
    "RandomStream",
    "seed_stream",
    "Distribution",
    "Uniform",
    "Deterministic",
    "Triangular",
    "Exponential",
    "Gamma",
    "TruncatedNormal",
    "Lognormal",
    "Weibull",
    "Discrete",
    "Continuous",
    "Empirical",
    "Sequential",
    "TimeDependent",
    "NoArrivals",
    "sample_batch_size",
    "check_spec",
    "from_spec",
    "CONFIG_FAMILIES",
]


class RandomStream:
    """Seeded uniform source owned by exactly one simulation run.

    Backed by the standard library Mersenne Twister: equal seeds give
    bit-equal draw sequences across runs, platforms, and process counts.
    """

    __slots__ = ("seed", "_rng")

    def __init__(self, seed: int):
        if not isinstance(seed, int) or seed < 0:
            raise ValueError(f"seed must be a non-negative integer, got {seed!r}")
        self.seed = seed
        self._rng = random.Random(seed)

    def uniform(self) -> float:
        """One draw in [0, 1)."""
        return self._rng.random()

    def normal(self, mu: float, sigma: float) -> float:
        return self._rng.normalvariate(mu, sigma)

    def gamma(self, shape: float, scale: float) -> float:
        return self._rng.gammavariate(shape, scale)


def seed_stream(seed: int) -> RandomStream:
    """Fresh deterministic stream; equal seeds produce equal sequences."""
    return RandomStream(seed)


class Distribution:
    """Base class for all duration samplers."""

    def sample(self, stream: RandomStream, now: float = 0.0) -> float:
        raise NotImplementedError

    def for_run(self) -> "Distribution":
        """Per-run instance; stateless families return self."""
        return self


@dataclass(frozen=True)
class Uniform(Distribution):
    lower: float
    upper: float

    def __post_init__(self):
        if self.lower < 0 or self.upper < self.lower:
            raise ValueError(
                f"Uniform requires 0 <= lower <= upper, got ({self.lower}, {self.upper})"
            )

    def sample(self, stream: RandomStream, now: float = 0.0) -> float:
        return self.lower + (self.upper - self.lower) * stream.uniform()


@dataclass(frozen=True)
class Deterministic(Distribution):
    value: float

    def __post_init__(self):
        if self.value < 0:
            raise ValueError(f"Deterministic value must be >= 0, got {self.value}")

    def sample(self, stream: RandomStream, now: float = 0.0) -> float:
        return self.value


@dataclass(frozen=True)
class Triangular(Distribution):
    lower: float
    mode: float
    upper: float

    def __post_init__(self):
        if not (0 <= self.lower <= self.mode <= self.upper):
            raise ValueError(
                "Triangular requires 0 <= lower <= mode <= upper, got "
                f"({self.lower}, {self.mode}, {self.upper})"
            )

    def sample(self, stream: RandomStream, now: float = 0.0) -> float:
        u = stream.uniform()
        a, c, b = self.lower, self.mode, self.upper
        if b == a:
            return a
        cut = (c - a) / (b - a)
        if u < cut:
            return a + math.sqrt(u * (b - a) * (c - a))
        return b - math.sqrt((1.0 - u) * (b - a) * (b - c))


@dataclass(frozen=True)
class Exponential(Distribution):
    rate: float

    def __post_init__(self):
        if self.rate <= 0:
            raise ValueError(f"Exponential rate must be > 0, got {self.rate}")

    def sample(self, stream: RandomStream, now: float = 0.0) -> float:
        return -math.log(1.0 - stream.uniform()) / self.rate


@dataclass(frozen=True)
class Gamma(Distribution):
    shape: float
    scale: float

    def __post_init__(self):
        if self.shape <= 0 or self.scale <= 0:
            raise ValueError(
                f"Gamma requires shape > 0 and scale > 0, got ({self.shape}, {self.scale})"
            )

    def sample(self, stream: RandomStream, now: float = 0.0) -> float:
        return stream.gamma(self.shape, self.scale)


@dataclass(frozen=True)
class TruncatedNormal(Distribution):
    """Normal(mean, sd) restricted to [0, inf) by rejection resampling.

    Resampling keeps a proper distribution; clamping would put an atom at 0.
    """

    mean: float
    sd: float

    def __post_init__(self):
        if self.sd <= 0:
            raise ValueError(f"TruncatedNormal sd must be > 0, got {self.sd}")

    def sample(self, stream: RandomStream, now: float = 0.0) -> float:
        while True:
            x = stream.normal(self.mean, self.sd)
            if x >= 0.0:
                return x


@dataclass(frozen=True)
class Lognormal(Distribution):
    mu: float
    sigma: float

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError(f"Lognormal sigma must be > 0, got {self.sigma}")

    def sample(self, stream: RandomStream, now: float = 0.0) -> float:
        return math.exp(stream.normal(self.mu, self.sigma))


@dataclass(frozen=True)
class Weibull(Distribution):
    scale: float
    shape: float

    def __post_init__(self):
        if self.scale <= 0 or self.shape <= 0:
            raise ValueError(
                f"Weibull requires scale > 0 and shape > 0, got ({self.scale}, {self.shape})"
            )

    def sample(self, stream: RandomStream, now: float = 0.0) -> float:
        return self.scale * (-math.log(1.0 - stream.uniform())) ** (1.0 / self.shape)


class Discrete(Distribution):
    """Finite distribution over non-negative values with given probabilities."""

    def __init__(self, values: Sequence[float], probs: Sequence[float]):
        values = tuple(values)
        probs = tuple(probs)
        if len(values) == 0 or len(values) != len(probs):
            raise ValueError("Discrete requires equal-length, non-empty values and probs")
        if any(v < 0 for v in values):
            raise ValueError(f"Discrete values must be >= 0, got {values}")
        if any(p < 0 or p > 1 for p in probs):
            raise ValueError(f"Discrete probabilities must lie in [0, 1], got {probs}")
        total = math.fsum(probs)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"Discrete probabilities must sum to 1, got {total}")
        self.values = values
        self.probs = probs

    def __repr__(self):
        return f"Discrete(values={self.values}, probs={self.probs})"

    def __eq__(self, other):
        return (
            isinstance(other, Discrete)
            and self.values == other.values
            and self.probs == other.probs
        )

    def sample(self, stream: RandomStream, now: float = 0.0) -> float:
        u = stream.uniform()
        acc = 0.0
        for v, p in zip(self.values, self.probs):
            acc += p
            if u < acc:
                return v
        return self.values[-1]


class Continuous(Distribution):
    """Caller-supplied sampler: a function of the RandomStream returning a duration."""

    def __init__(self, sampler: Callable[[RandomStream], float]):
        if not callable(sampler):
            raise ValueError("Continuous requires a callable sampler")
        self.sampler = sampler

    def sample(self, stream: RandomStream, now: float = 0.0) -> float:
        x = float(self.sampler(stream))
        if x < 0:
            raise ValueError(f"Continuous sampler returned a negative duration: {x}")
        return x


class Empirical(Distribution):
    """Uniform choice over a non-empty set of observed durations."""

    def __init__(self, observations: Sequence[float]):
        observations = tuple(observations)
        if not observations:
            raise ValueError("Empirical requires at least one observation")
        if any(x < 0 for x in observations):
            raise ValueError(f"Empirical observations must be >= 0, got {observations}")
        self.observations = observations

    def __repr__(self):
        return f"Empirical({self.observations})"

    def __eq__(self, other):
        return isinstance(other, Empirical) and self.observations == other.observations

    def sample(self, stream: RandomStream, now: float = 0.0) -> float:
        return self.observations[int(stream.uniform() * len(self.observations))]


class Sequential(Distribution):
    """Cycles through a fixed list of durations; consumes no uniforms.

    Sampling advances an internal cursor, so the engine takes a fresh
    per-run copy via for_run() to keep shared network definitions immutable.
    """

    def __init__(self, values: Sequence[float]):
        values = tuple(values)
        if not values:
            raise ValueError("Sequential requires at least one value")
        if any(x < 0 for x in values):
            raise ValueError(f"Sequential values must be >= 0, got {values}")
        self.values = values
        self._cursor = 0

    def __repr__(self):
        return f"Sequential({self.values})"

    def __eq__(self, other):
        return isinstance(other, Sequential) and self.values == other.values

    def for_run(self) -> "Sequential":
        return Sequential(self.values)

    def sample(self, stream: RandomStream, now: float = 0.0) -> float:
        v = self.values[self._cursor]
        self._cursor = (self._cursor + 1) % len(self.values)
        return v


class TimeDependent(Distribution):
    """Duration given directly by a function of the current simulation time."""

    def __init__(self, func: Callable[[float], float]):
        if not callable(func):
            raise ValueError("TimeDependent requires a callable of the clock")
        self.func = func

    def sample(self, stream: RandomStream, now: float = 0.0) -> float:
        x = float(self.func(now))
        if x < 0:
            raise ValueError(f"TimeDependent function returned a negative duration: {x}")
        return x


@dataclass(frozen=True)
class NoArrivals(Distribution):
    """Marks an arrival stream as absent; sampling it is a programming error."""

    def sample(self, stream: RandomStream, now: float = 0.0) -> float:
        raise RuntimeError("NoArrivals must never be sampled")


def sample_batch_size(dist: Distribution, stream: RandomStream, now: float = 0.0) -> int:
    """One batch-size draw; must land on an integer >= 1."""
    v = dist.sample(stream, now)
    n = int(v)
    if n != v or n < 1:
        raise ValueError(f"batch size draw must be an integer >= 1, got {v}")
    return n


def integer_support_at_least_one(dist: Distribution) -> bool:
    """True when every possible draw is an integer >= 1 (checkable families only)."""
    if isinstance(dist, Deterministic):
        return dist.value == int(dist.value) and dist.value >= 1
    if isinstance(dist, Discrete):
        return all(v == int(v) and v >= 1 for v in dist.values)
    if isinstance(dist, Sequential):
        return all(v == int(v) and v >= 1 for v in dist.values)
    if isinstance(dist, Empirical):
        return all(v == int(v) and v >= 1 for v in dist.observations)
    return False


# Families constructible from a config document: name -> (arity, factory).
# Continuous and TimeDependent take callables and are API-only.
CONFIG_FAMILIES: dict[str, tuple[int, Callable]] = {
    "Uniform": (2, Uniform),
    "Deterministic": (1, Deterministic),
    "Triangular": (3, Triangular),
    "Exponential": (1, Exponential),
    "Gamma": (2, Gamma),
    "TruncatedNormal": (2, TruncatedNormal),
    "Lognormal": (2, Lognormal),
    "Weibull": (2, Weibull),
    "Discrete": (2, Discrete),
    "Empirical": (1, Empirical),
    "Sequential": (1, Sequential),
    "NoArrivals": (0, NoArrivals),
}


def check_spec(spec) -> None:
    """Shape-check a config distribution entry without building it.

    Raises ValueError for a non-list, an unknown family name, or wrong arity;
    parameter constraints are enforced later, at construction.
    """
    if not isinstance(spec, (list, tuple)) or not spec or not isinstance(spec[0], str):
        raise ValueError(f"distribution must be a [name, params...] list, got {spec!r}")
    name = spec[0]
    if name not in CONFIG_FAMILIES:
        raise ValueError(f"unknown distribution name {name!r}")
    arity = CONFIG_FAMILIES[name][0]
    if len(spec) - 1 != arity:
        raise ValueError(
            f"distribution {name!r} takes {arity} parameter(s), got {len(spec) - 1}"
        )


def from_spec(spec) -> Distribution:
    """Build a Distribution from a config entry like ["Exponential", 3.0]."""
    check_spec(spec)
    _, factory = CONFIG_FAMILIES[spec[0]]
    return factory(*spec[1:])
