"""Closed-form Bayes estimators of the regression curve for the three
bundled conjugate models.

Each model has a hyperparameter record, a sufficient-statistics record that
is updated one pair at a time in O(1), and a closed-form estimator.

Example 2 and Example 3 each ship two variants.  ``"paper"`` is an
alternative closed form kept for comparison; the default is obtained by
integrating the model's own joint density against the conjugate posterior.
They disagree (see README), and only the default matches the quadrature
oracle in :mod:`bayes_regress.grid`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .errors import DomainError, UsageError
from .kernels import compensated_sum
from .models import (
    BivariateNormalModel,
    CrossedCoinModel,
    Dataset,
    ExponentialPrior,
    GammaExponentialModel,
    NormalPrior,
    UniformPrior,
)

# ---------------------------------------------------------------------------
# hyperparameters


@dataclass(frozen=True)
class Example1Hyper:
    """Exponential-rate model with prior rate ``lam`` (prior G(1, 1/lam))."""

    lam: float = 1.0
    name = "example1"
    variants = ("gamma-posterior",)

    def __post_init__(self):
        if not (math.isfinite(self.lam) and self.lam > 0):
            raise DomainError(f"lambda must be > 0, got {self.lam}")

    def model(self):
        return GammaExponentialModel()

    def prior(self):
        return ExponentialPrior(self.lam)


@dataclass(frozen=True)
class Example2Hyper:
    """Crossed-coin model under the uniform prior on (0, 1)."""

    name = "example2"
    variants = ("beta-posterior", "paper")

    def model(self):
        return CrossedCoinModel()

    def prior(self):
        return UniformPrior(0.0, 1.0)


@dataclass(frozen=True)
class Example3Hyper:
    """Bivariate normal location model with prior N(mu, tau^2)."""

    mu: float = 0.0
    tau: float = 1.0
    sigma: float = 1.0
    rho: float = 0.5
    name = "example3"
    variants = ("normal-posterior", "paper")

    def __post_init__(self):
        if not math.isfinite(self.mu):
            raise DomainError(f"mu must be finite, got {self.mu}")
        if not (math.isfinite(self.tau) and self.tau > 0):
            raise DomainError(f"tau must be > 0, got {self.tau}")
        if not (math.isfinite(self.sigma) and self.sigma > 0):
            raise DomainError(f"sigma must be > 0, got {self.sigma}")
        if not -1.0 < self.rho < 1.0:
            raise DomainError(f"rho must lie in (-1, 1), got {self.rho}")

    def model(self):
        return BivariateNormalModel(self.sigma, self.rho)

    def prior(self):
        return NormalPrior(self.mu, self.tau)


HyperParams = Example1Hyper | Example2Hyper | Example3Hyper


def resolve_variant(hyper: HyperParams, variant: str | None) -> str:
    if variant is None:
        return hyper.variants[0]
    if variant not in hyper.variants:
        raise UsageError(f"{hyper.name} has no closed-form variant {variant!r}; choose from {hyper.variants}")
    return variant


# ---------------------------------------------------------------------------
# sufficient statistics


def _neumaier(total: float, comp: float, x: float) -> tuple[float, float]:
    t = total + x
    if abs(total) >= abs(x):
        comp += (total - t) + x
    else:
        comp += (x - t) + total
    return t, comp


@dataclass(frozen=True)
class Example1Stats:
    """n and the compensated sum of x1 * (1 + x2)."""

    n: int = 0
    s_hi: float = 0.0
    s_lo: float = 0.0

    @property
    def s(self) -> float:
        return self.s_hi + self.s_lo


@dataclass(frozen=True)
class Example2Stats:
    """Cell counts n_{j1 j2} = #{i : (x1_i, x2_i) = (j1, j2)}."""

    n00: int = 0
    n01: int = 0
    n10: int = 0
    n11: int = 0

    @property
    def n(self) -> int:
        return self.n00 + self.n01 + self.n10 + self.n11


@dataclass(frozen=True)
class Example3Stats:
    """n and the compensated sum of x1 + x2."""

    n: int = 0
    s1_hi: float = 0.0
    s1_lo: float = 0.0

    @property
    def s1(self) -> float:
        return self.s1_hi + self.s1_lo


SufficientStats = Example1Stats | Example2Stats | Example3Stats

_STATS = {"example1": Example1Stats, "example2": Example2Stats, "example3": Example3Stats}


def empty_stats(hyper: HyperParams) -> SufficientStats:
    return _STATS[hyper.name]()


def _check_stats(hyper, stats):
    if not isinstance(stats, _STATS[hyper.name]):
        raise UsageError(f"{type(stats).__name__} does not belong to {hyper.name}")


def update_stats(hyper: HyperParams, stats: SufficientStats, pair) -> SufficientStats:
    """Statistics of the sample extended by one ``(x1, x2)`` pair."""
    _check_stats(hyper, stats)
    x1, x2 = float(pair[0]), float(pair[1])
    if hyper.name == "example1":
        if not (x1 > 0 and x2 > 0 and math.isfinite(x1) and math.isfinite(x2)):
            raise DomainError(f"example1 observations must lie in (0, inf)^2, got ({x1}, {x2})")
        hi, lo = _neumaier(stats.s_hi, stats.s_lo, x1 * (1.0 + x2))
        return Example1Stats(stats.n + 1, hi, lo)
    if hyper.name == "example2":
        if x1 not in (0.0, 1.0) or x2 not in (0.0, 1.0):
            raise DomainError(f"example2 observations must be binary, got ({x1}, {x2})")
        key = f"n{int(x1)}{int(x2)}"
        return replace(stats, **{key: getattr(stats, key) + 1})
    if not (math.isfinite(x1) and math.isfinite(x2)):
        raise DomainError(f"example3 observations must be finite, got ({x1}, {x2})")
    hi, lo = _neumaier(stats.s1_hi, stats.s1_lo, x1 + x2)
    return Example3Stats(stats.n + 1, hi, lo)


def stats_from_data(hyper: HyperParams, data: Dataset) -> SufficientStats:
    """Batch computation of the sufficient statistics of ``data``."""
    if hyper.name == "example2":
        x1, x2 = data.x1, data.x2
        if data.n and not (((x1 == 0) | (x1 == 1)).all() and ((x2 == 0) | (x2 == 1)).all()):
            raise DomainError("example2 observations must be binary")
        return Example2Stats(
            int(((x1 == 0) & (x2 == 0)).sum()),
            int(((x1 == 0) & (x2 == 1)).sum()),
            int(((x1 == 1) & (x2 == 0)).sum()),
            int(((x1 == 1) & (x2 == 1)).sum()),
        )
    hyper.model().check_data(data)
    if hyper.name == "example1":
        return Example1Stats(data.n, compensated_sum(data.x1 * (1.0 + data.x2)), 0.0)
    return Example3Stats(data.n, compensated_sum(data.x1 + data.x2), 0.0)


# ---------------------------------------------------------------------------
# Example 3 helpers for the alternative variant


def ex3_s1(data: Dataset) -> float:
    """Sum over the sample of x1 + x2."""
    return compensated_sum(data.x1 + data.x2)


def ex3_a_n(n: int, rho: float, sigma: float, tau: float) -> float:
    """a_n = 2 (n + 1)(1 + rho) + sigma^2 / tau^2."""
    return 2.0 * (n + 1) * (1.0 + rho) + sigma**2 / tau**2


def ex3_rho_1(a_n: float, rho: float) -> float:
    """rho_1 = -rho (a_n + c) / (a_n - c) with c = (1 - rho) / (1 + rho)."""
    c = (1.0 - rho) / (1.0 + rho)
    return -(a_n + c) / (a_n - c) * rho


def ex3_m_1(s1: float, rho_1: float, a_n: float, mu: float, rho: float, sigma: float, tau: float) -> float:
    num = s1 + (1.0 + rho) * sigma**2 / tau**2 * mu
    return num / (2.0 * (1.0 - rho_1) * (1.0 + rho) ** 2 * sigma**2 * a_n)


# ---------------------------------------------------------------------------
# closed forms


def closed_form_regression(
    hyper: HyperParams, stats: SufficientStats, x1: float, variant: str | None = None
) -> float:
    """Bayes estimate of the regression curve at ``x1`` from sufficient statistics."""
    _check_stats(hyper, stats)
    variant = resolve_variant(hyper, variant)
    x1 = float(x1)
    if hyper.name == "example1":
        if not (x1 > 0 and math.isfinite(x1)):
            raise DomainError(f"example1 estimator needs x1 > 0, got {x1}")
        return (hyper.lam + x1 + stats.s) / ((2 * stats.n + 1) * x1)

    if hyper.name == "example2":
        if x1 not in (0.0, 1.0):
            raise DomainError(f"example2 predictor must be 0 or 1, got {x1}")
        n_plus0 = stats.n00 + stats.n10
        if variant == "paper":
            num = n_plus0 + 2 * stats.n01 + 1
            den = 2 * stats.n + n_plus0 + 2 * stats.n01 + (4 if x1 == 1.0 else 3)
            return num / den
        # posterior Beta(a, b); estimate E[theta^2]/E[theta] or E[(1-theta)^2]/E[1-theta]
        a = n_plus0 + 2 * stats.n11 + 1
        b = n_plus0 + 2 * stats.n01 + 1
        return ((a if x1 == 1.0 else b) + 1) / (a + b + 1)

    if not math.isfinite(x1):
        raise DomainError(f"example3 predictor must be finite, got {x1}")
    mu, tau, sigma, rho = hyper.mu, hyper.tau, hyper.sigma, hyper.rho
    if variant == "paper":
        a = ex3_a_n(stats.n, rho, sigma, tau)
        r1 = ex3_rho_1(a, rho)
        m1 = ex3_m_1(stats.s1, r1, a, mu, rho, sigma, tau)
        return (1.0 - r1) * m1 + r1 * x1
    s2 = sigma**2
    post_prec = 1.0 / tau**2 + 2.0 * stats.n / (s2 * (1.0 + rho))
    post_prec_mean = mu / tau**2 + stats.s1 / (s2 * (1.0 + rho))
    theta_given_x1 = (post_prec_mean + x1 / s2) / (post_prec + 1.0 / s2)
    return (1.0 - rho) * theta_given_x1 + rho * x1


def closed_form_curve(hyper, stats, x1s, variant=None) -> list[float]:
    return [closed_form_regression(hyper, stats, x, variant) for x in x1s]
