"""Quadrature representation of the posterior on a prior-quantile grid.

Nodes sit at the prior quantiles ``(j - 0.5) / J`` so that each carries
prior mass ``1 / J``; the posterior weight of a node is then proportional
to the likelihood alone.  The posterior-predictive regression curve is the
conditional mean of X2 given X1 = x1 under the mixture of sampling
distributions weighted by the posterior:

    m(x1) = sum_j w_j r_j(x1) f1_j(x1) / sum_j w_j f1_j(x1)

where ``f1_j`` is the X1 marginal density at node j.  Both sums are
evaluated in log space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DegeneratePosteriorError, NoPredictiveMassError, UsageError
from .kernels import logsumexp, signed_logsumexp
from .models import BayesModel, Dataset, Prior

DEFAULT_ORACLE_SIZE = 4096
DEFAULT_MC_SIZE = 512

# max node-by-observation block evaluated at once
_BLOCK = 1 << 20


@dataclass(frozen=True, eq=False)
class PosteriorGrid:
    nodes: np.ndarray
    log_weights: np.ndarray
    weights: np.ndarray
    n_obs: int

    @property
    def size(self) -> int:
        return int(self.nodes.size)

    def mean(self, fn: Callable = None) -> float:
        """Posterior mean of ``fn(theta)`` (of theta itself by default)."""
        vals = self.nodes if fn is None else np.asarray(fn(self.nodes), dtype=np.float64)
        return float(self.weights @ vals)


def _frozen(a):
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.flags.writeable = False
    return a


def quantile_nodes(prior: Prior, grid_size: int) -> np.ndarray:
    u = (np.arange(1, grid_size + 1) - 0.5) / grid_size
    return np.asarray(prior.quantile(u), dtype=np.float64)


def log_likelihood(model: BayesModel, nodes: np.ndarray, data: Dataset) -> np.ndarray:
    """Sum over observations of log f_theta(x1_i, x2_i) at every node."""
    out = np.zeros(nodes.size)
    if data.n == 0:
        return out
    step = max(1, _BLOCK // max(nodes.size, 1))
    col = nodes[:, None]
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        for start in range(0, data.n, step):
            blk = model.log_joint(col, data.x1[None, start : start + step], data.x2[None, start : start + step])
            out += blk.sum(axis=1)
    return out


def normalize(log_weights: np.ndarray) -> np.ndarray:
    lse = logsumexp(log_weights)
    if not math.isfinite(lse):
        lo, hi = np.nanmin(log_weights), np.nanmax(log_weights)
        raise DegeneratePosteriorError(
            f"posterior has no mass on the grid (log-likelihood range [{lo}, {hi}])"
        )
    w = np.exp(log_weights - np.max(log_weights))
    return w / w.sum()


def build_grid(model: BayesModel, prior: Prior, data: Dataset, grid_size: int = DEFAULT_ORACLE_SIZE) -> PosteriorGrid:
    """Discretized posterior of theta given ``data``."""
    if grid_size < 2:
        raise UsageError(f"grid_size must be >= 2, got {grid_size}")
    model.check_data(data)
    nodes = quantile_nodes(prior, grid_size)
    lw = log_likelihood(model, nodes, data)
    lw = np.where(np.isnan(lw), -np.inf, lw)
    return PosteriorGrid(_frozen(nodes), _frozen(lw), _frozen(normalize(lw)), data.n)


def grid_from_nodes(nodes, log_weights=None, n_obs: int = 0) -> PosteriorGrid:
    """Grid over arbitrary nodes; uniform weights unless ``log_weights`` given."""
    nodes = np.asarray(nodes, dtype=np.float64).reshape(-1)
    if nodes.size < 1:
        raise UsageError("grid needs at least one node")
    lw = np.zeros(nodes.size) if log_weights is None else np.asarray(log_weights, dtype=np.float64)
    return PosteriorGrid(_frozen(nodes), _frozen(lw), _frozen(normalize(lw)), n_obs)


def _log_weights(grid: PosteriorGrid) -> np.ndarray:
    return grid.log_weights - logsumexp(grid.log_weights)


def predictive_regression(grid: PosteriorGrid, model: BayesModel, x1: float) -> float:
    """Posterior-predictive regression curve (the Bayes estimate) at ``x1``."""
    x1 = model.check_x1(x1)
    return _predictive(_log_weights(grid), grid.nodes, model, x1)


def _predictive(logw, nodes, model, x1):
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        a = logw + np.asarray(model.log_x1_marginal(nodes, x1), dtype=np.float64)
        r = np.broadcast_to(np.asarray(model.regression_curve(nodes, x1), dtype=np.float64), a.shape)
        a = np.where(np.isnan(a), -np.inf, a)
        lden = logsumexp(a)
        if not math.isfinite(lden):
            raise NoPredictiveMassError(f"x1={x1} has no predictive density on the grid")
        lnum, sign = signed_logsumexp(a + np.log(np.abs(r)), np.sign(r))
    if sign == 0.0:
        return 0.0
    value = sign * math.exp(lnum - lden)
    if not math.isfinite(value):
        raise NoPredictiveMassError(f"non-finite predictive regression at x1={x1}")
    return value


def predictive_statistic_mean(grid: PosteriorGrid, model: BayesModel, statistic_mean: Callable) -> float:
    """Posterior-predictive mean of a statistic whose mean under theta is given."""
    vals = np.array([float(statistic_mean(t)) for t in grid.nodes])
    if not np.all(np.isfinite(vals)):
        raise FloatingPointError("statistic mean is not finite at every grid node")
    return float(grid.weights @ vals)


class CurveError(NoPredictiveMassError):
    """Raised by :func:`curve_estimate` with the failing positions attached."""

    def __init__(self, failures):
        self.failures = failures
        detail = "; ".join(f"[{i}] x1={x}: {e}" for i, x, e in failures)
        super().__init__(f"{len(failures)} curve point(s) failed: {detail}")


def curve_estimate(grid: PosteriorGrid, model: BayesModel, x1_grid: Sequence[float]) -> list[float]:
    """Elementwise :func:`predictive_regression`; errors are collected per point."""
    logw = _log_weights(grid)
    out, failures = [], []
    for i, x in enumerate(x1_grid):
        try:
            out.append(_predictive(logw, grid.nodes, model, model.check_x1(x)))
        except (NoPredictiveMassError, ValueError) as exc:
            failures.append((i, x, exc))
    if failures:
        raise CurveError(failures)
    return out
