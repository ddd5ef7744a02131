"""Bayesian experiment abstraction: supports, observations, priors, models.

A model describes the sampling kernel of a pair ``(X1, X2)`` given a scalar
parameter ``theta``; a prior describes the distribution of ``theta``.  All
densities are handled in log space.  The density methods are vectorized and
unchecked (they are called on whole grids); the public entry points
``sample_pair``, ``grow_dataset`` and ``regression_truth`` validate their
inputs and raise :class:`~bayes_regress.errors.DomainError`.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Iterator, NamedTuple, Sequence

import numpy as np
from scipy.special import ndtr, ndtri

from .errors import DomainError, UsageError
from .seeding import open_uniform


# ---------------------------------------------------------------------------
# supports


@dataclass(frozen=True)
class Interval:
    """Real interval with open, closed or infinite endpoints."""

    lo: float = -math.inf
    hi: float = math.inf
    lo_closed: bool = False
    hi_closed: bool = False

    def contains(self, x) -> bool:
        x = np.asarray(x, dtype=np.float64)
        lo_ok = x >= self.lo if self.lo_closed else x > self.lo
        hi_ok = x <= self.hi if self.hi_closed else x < self.hi
        return bool(np.all(lo_ok & hi_ok & np.isfinite(x)))

    def __str__(self):
        left = "[" if self.lo_closed else "("
        right = "]" if self.hi_closed else ")"
        return f"{left}{self.lo:g}, {self.hi:g}{right}"


@dataclass(frozen=True)
class FiniteSet:
    values: tuple

    def contains(self, x) -> bool:
        return bool(np.all(np.isin(np.asarray(x, dtype=np.float64), self.values)))

    def __str__(self):
        return "{" + ", ".join(f"{v:g}" for v in self.values) + "}"


# ---------------------------------------------------------------------------
# observations


class ObsPair(NamedTuple):
    x1: float
    x2: float


class Dataset:
    """An ordered sample of observation pairs, stored column-wise.

    Columns are read-only arrays; ``prefix(k)`` returns a view of the first
    ``k`` pairs, so every prefix of a dataset is itself a dataset.
    """

    __slots__ = ("x1", "x2")

    def __init__(self, x1, x2):
        x1 = np.array(x1, dtype=np.float64).reshape(-1)
        x2 = np.array(x2, dtype=np.float64).reshape(-1)
        if x1.shape != x2.shape:
            raise UsageError(f"column lengths differ: {x1.size} vs {x2.size}")
        x1.flags.writeable = False
        x2.flags.writeable = False
        self.x1 = x1
        self.x2 = x2

    @classmethod
    def empty(cls) -> "Dataset":
        return cls(np.empty(0), np.empty(0))

    @classmethod
    def from_pairs(cls, pairs) -> "Dataset":
        pairs = [tuple(p) for p in pairs]
        if not pairs:
            return cls.empty()
        x1, x2 = zip(*pairs)
        return cls(x1, x2)

    @property
    def n(self) -> int:
        return int(self.x1.size)

    def __len__(self):
        return self.n

    def __iter__(self) -> Iterator[ObsPair]:
        for a, b in zip(self.x1.tolist(), self.x2.tolist()):
            yield ObsPair(a, b)

    def __getitem__(self, i) -> ObsPair:
        return ObsPair(float(self.x1[i]), float(self.x2[i]))

    def prefix(self, k: int) -> "Dataset":
        if not 0 <= k <= self.n:
            raise UsageError(f"prefix length {k} outside [0, {self.n}]")
        out = Dataset.__new__(Dataset)
        out.x1 = self.x1[:k]
        out.x2 = self.x2[:k]
        return out

    def concat(self, other: "Dataset") -> "Dataset":
        return Dataset(np.concatenate([self.x1, other.x1]), np.concatenate([self.x2, other.x2]))

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return np.array_equal(self.x1, other.x1) and np.array_equal(self.x2, other.x2)

    def __repr__(self):
        return f"Dataset(n={self.n})"


# ---------------------------------------------------------------------------
# priors


class Prior(ABC):
    """Prior distribution on a scalar parameter."""

    support: Interval

    @abstractmethod
    def log_density(self, theta): ...

    @abstractmethod
    def quantile(self, u): ...

    @abstractmethod
    def cdf(self, theta): ...

    def sample(self, rng: np.random.Generator, size=None):
        return self.quantile(open_uniform(rng, size))

    def _check_u(self, u):
        u = np.asarray(u, dtype=np.float64)
        if np.any((u <= 0.0) | (u >= 1.0)) or np.any(np.isnan(u)):
            raise DomainError(f"quantile level must lie in (0, 1), got {u}")
        return u


@dataclass(frozen=True)
class ExponentialPrior(Prior):
    """Exponential prior with the given rate, i.e. G(1, 1/rate) in shape-scale form."""

    rate: float = 1.0
    support = Interval(0.0, math.inf)

    def __post_init__(self):
        if not self.rate > 0:
            raise DomainError(f"exponential prior rate must be > 0, got {self.rate}")

    def log_density(self, theta):
        theta = np.asarray(theta, dtype=np.float64)
        with np.errstate(divide="ignore"):
            return np.where(theta > 0, math.log(self.rate) - self.rate * theta, -np.inf)

    def quantile(self, u):
        return -np.log1p(-self._check_u(u)) / self.rate

    def cdf(self, theta):
        theta = np.asarray(theta, dtype=np.float64)
        return np.where(theta > 0, -np.expm1(-self.rate * theta), 0.0)


@dataclass(frozen=True)
class UniformPrior(Prior):
    lo: float = 0.0
    hi: float = 1.0

    def __post_init__(self):
        if not self.hi > self.lo:
            raise DomainError(f"uniform prior needs lo < hi, got ({self.lo}, {self.hi})")

    @property
    def support(self):
        return Interval(self.lo, self.hi)

    def log_density(self, theta):
        theta = np.asarray(theta, dtype=np.float64)
        inside = (theta > self.lo) & (theta < self.hi)
        return np.where(inside, -math.log(self.hi - self.lo), -np.inf)

    def quantile(self, u):
        return self.lo + (self.hi - self.lo) * self._check_u(u)

    def cdf(self, theta):
        theta = np.asarray(theta, dtype=np.float64)
        return np.clip((theta - self.lo) / (self.hi - self.lo), 0.0, 1.0)


@dataclass(frozen=True)
class NormalPrior(Prior):
    mean: float = 0.0
    sd: float = 1.0
    support = Interval()

    def __post_init__(self):
        if not self.sd > 0:
            raise DomainError(f"normal prior sd must be > 0, got {self.sd}")

    def log_density(self, theta):
        z = (np.asarray(theta, dtype=np.float64) - self.mean) / self.sd
        return -0.5 * z * z - math.log(self.sd) - 0.5 * math.log(2 * math.pi)

    def quantile(self, u):
        return self.mean + self.sd * ndtri(self._check_u(u))

    def cdf(self, theta):
        return ndtr((np.asarray(theta, dtype=np.float64) - self.mean) / self.sd)


# ---------------------------------------------------------------------------
# sampling models


class BayesModel(ABC):
    """Sampling kernel of ``(X1, X2)`` given a scalar ``theta``.

    Subclasses implement the vectorized, unchecked primitives below.  Sampling
    goes through inverse CDFs: ``X1 = x1_quantile(theta, U)`` and
    ``X2 = x2_quantile(theta, X1, V)`` with independent open uniforms.
    """

    name: str
    parameter_support: Interval
    predictor_support: Interval | FiniteSet
    response_support: Interval | FiniteSet
    discrete: bool = False

    @abstractmethod
    def log_joint(self, theta, x1, x2):
        """log f_theta(x1, x2), broadcasting over all arguments."""

    @abstractmethod
    def log_x1_marginal(self, theta, x1):
        """log density (or mass) of X1 under theta."""

    @abstractmethod
    def regression_curve(self, theta, x1):
        """E_theta(X2 | X1 = x1), broadcasting."""

    @abstractmethod
    def x1_quantile(self, theta, u): ...

    @abstractmethod
    def x2_quantile(self, theta, x1, v): ...

    # -- validation --------------------------------------------------------

    def check_theta(self, theta) -> float:
        if not self.parameter_support.contains(theta):
            raise DomainError(
                f"{self.name}: parameter {theta!r} outside support {self.parameter_support}"
            )
        return float(theta)

    def check_x1(self, x1) -> float:
        if not self.predictor_support.contains(x1):
            raise DomainError(
                f"{self.name}: predictor value {x1!r} outside support {self.predictor_support}"
            )
        return float(x1)

    def check_data(self, data: Dataset) -> None:
        if data.n == 0:
            return
        if not self.predictor_support.contains(data.x1):
            bad = data.x1[~_elementwise(self.predictor_support, data.x1)][0]
            raise DomainError(f"{self.name}: predictor value {bad!r} outside support {self.predictor_support}")
        if not self.response_support.contains(data.x2):
            bad = data.x2[~_elementwise(self.response_support, data.x2)][0]
            raise DomainError(f"{self.name}: response value {bad!r} outside support {self.response_support}")

    # -- sampling ----------------------------------------------------------

    def sample_pairs(self, theta: float, size: int, rng: np.random.Generator) -> Dataset:
        theta = self.check_theta(theta)
        u = open_uniform(rng, size)
        v = open_uniform(rng, size)
        x1 = self.x1_quantile(theta, u)
        x2 = self.x2_quantile(theta, x1, v)
        return Dataset(x1, x2)

    def sample_x1(self, theta: float, rng: np.random.Generator, band=(0.0, 1.0)) -> float:
        """One X1 draw restricted to the ``band`` quantile range of its marginal."""
        lo, hi = band
        u = lo + (hi - lo) * open_uniform(rng)
        return float(self.x1_quantile(theta, u))

    def __repr__(self):
        return f"{type(self).__name__}()"


def _elementwise(support, x):
    return np.array([support.contains(v) for v in np.asarray(x).ravel()])


class GammaExponentialModel(BayesModel):
    """X1 ~ exponential(rate theta); X2 | X1 = x1 ~ exponential(rate theta * x1).

    Joint density theta^2 x1 exp(-theta x1 (1 + x2)) on (0, inf)^2, with
    regression curve 1 / (theta x1).
    """

    name = "example1"
    parameter_support = Interval(0.0, math.inf)
    predictor_support = Interval(0.0, math.inf)
    response_support = Interval(0.0, math.inf)

    def log_joint(self, theta, x1, x2):
        return 2.0 * np.log(theta) + np.log(x1) - theta * x1 * (1.0 + x2)

    def log_x1_marginal(self, theta, x1):
        return np.log(theta) - theta * x1

    def regression_curve(self, theta, x1):
        return 1.0 / (theta * x1)

    def x1_quantile(self, theta, u):
        return -np.log1p(-u) / theta

    def x2_quantile(self, theta, x1, v):
        return -np.log1p(-v) / (theta * x1)


class CrossedCoinModel(BayesModel):
    """Two-toss Bernoulli model on {0, 1}^2.

    X1 ~ Bernoulli(theta); given X1 = 1 the second toss is Bernoulli(theta),
    given X1 = 0 it is Bernoulli(1 - theta).  Cell masses:
    (0,0) and (1,0): theta(1-theta); (0,1): (1-theta)^2; (1,1): theta^2.
    """

    name = "example2"
    # endpoints allowed: the tosses are degenerate but well defined there
    parameter_support = Interval(0.0, 1.0, True, True)
    predictor_support = FiniteSet((0.0, 1.0))
    response_support = FiniteSet((0.0, 1.0))
    discrete = True
    cells = ((0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0))

    def log_joint(self, theta, x1, x2):
        p = self.regression_curve(theta, x1)
        with np.errstate(divide="ignore"):
            return self.log_x1_marginal(theta, x1) + np.where(x2 == 1.0, np.log(p), np.log1p(-p))

    def log_x1_marginal(self, theta, x1):
        with np.errstate(divide="ignore"):
            return np.where(x1 == 1.0, np.log(theta), np.log1p(-theta))

    def regression_curve(self, theta, x1):
        theta = np.asarray(theta, dtype=np.float64)
        return np.where(x1 == 1.0, theta, 1.0 - theta)

    def x1_quantile(self, theta, u):
        return np.where(u > 1.0 - theta, 1.0, 0.0)

    def x2_quantile(self, theta, x1, v):
        p = self.regression_curve(theta, x1)
        return np.where(v > 1.0 - p, 1.0, 0.0)


@dataclass(frozen=True, repr=True)
class BivariateNormalModel(BayesModel):
    """(X1, X2) ~ N2((theta, theta), sigma^2 [[1, rho], [rho, 1]])."""

    sigma: float = 1.0
    rho: float = 0.5

    name = "example3"
    parameter_support = Interval()
    predictor_support = Interval()
    response_support = Interval()

    def __post_init__(self):
        if not self.sigma > 0:
            raise DomainError(f"sigma must be > 0, got {self.sigma}")
        if not -1.0 < self.rho < 1.0:
            raise DomainError(f"rho must lie in (-1, 1), got {self.rho}")

    def log_joint(self, theta, x1, x2):
        s2 = self.sigma**2
        q = 1.0 - self.rho**2
        d1 = x1 - theta
        d2 = x2 - theta
        quad = (d1 * d1 - 2.0 * self.rho * d1 * d2 + d2 * d2) / (s2 * q)
        return -0.5 * quad - math.log(2.0 * math.pi * s2 * math.sqrt(q))

    def log_x1_marginal(self, theta, x1):
        z = (x1 - theta) / self.sigma
        return -0.5 * z * z - math.log(self.sigma) - 0.5 * math.log(2.0 * math.pi)

    def regression_curve(self, theta, x1):
        return (1.0 - self.rho) * theta + self.rho * x1

    def x1_quantile(self, theta, u):
        return theta + self.sigma * ndtri(u)

    def x2_quantile(self, theta, x1, v):
        sd = self.sigma * math.sqrt(1.0 - self.rho**2)
        return self.regression_curve(theta, x1) + sd * ndtri(v)


# ---------------------------------------------------------------------------
# checked operations


def sample_pair(model: BayesModel, theta: float, rng: np.random.Generator) -> ObsPair:
    """Draw one ``(x1, x2)`` from the model at ``theta``."""
    d = model.sample_pairs(theta, 1, rng)
    return d[0]


def grow_dataset(
    model: BayesModel, theta: float, target_n: int, rng: np.random.Generator, existing: Dataset | None = None
) -> Dataset:
    """Extend ``existing`` with fresh i.i.d. draws up to ``target_n`` pairs.

    Existing pairs are kept unchanged, so successive calls trace one path.
    """
    existing = Dataset.empty() if existing is None else existing
    if target_n < existing.n:
        raise UsageError(f"target_n={target_n} is smaller than existing n={existing.n}")
    model.check_theta(theta)
    if target_n == existing.n:
        return existing
    return existing.concat(model.sample_pairs(theta, target_n - existing.n, rng))


def regression_truth(model: BayesModel, theta: float, x1: float) -> float:
    """The true regression curve E_theta(X2 | X1 = x1)."""
    theta = model.check_theta(theta)
    x1 = model.check_x1(x1)
    return float(model.regression_curve(theta, x1))


def regression_truth_many(model: BayesModel, theta: float, x1s: Sequence[float]) -> np.ndarray:
    theta = model.check_theta(theta)
    x1s = np.asarray(x1s, dtype=np.float64)
    for x in x1s:
        model.check_x1(x)
    return np.asarray(model.regression_curve(theta, x1s), dtype=np.float64)
