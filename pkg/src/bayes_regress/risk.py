"""Monte Carlo estimation of Bayes risk, consistency paths and paired
estimator comparisons.

One replication draws ``theta`` from the prior, one sample path of the
largest requested size, and (for risk) one evaluation point ``x1`` from the
X1 marginal at ``theta``.  Every sample size in a schedule is evaluated on a
prefix of that single path.  Replication ``i`` uses the generator
``replication_rng(seed, tag, i)``, so results do not depend on how
replications are scheduled across workers; aggregation always runs in
replication order.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .baseline import DISCRETE_BANDWIDTH, NWConfig, nadaraya_watson
from .conjugate import HyperParams, closed_form_regression, resolve_variant, stats_from_data
from .errors import ExperimentError, NumericalFailure, UsageError
from .grid import DEFAULT_MC_SIZE, build_grid, curve_estimate
from .models import Dataset
from .seeding import check_seed, replication_rng

MAX_FAILURE_RATE = 0.05
THREADS_ENV = "BAYES_REGRESS_THREADS"
BAYES_IDS = ("bayes-closed", "bayes-grid")


def default_trim(model_name: str) -> tuple[float, float]:
    # the example1 risk integrand blows up as x1 -> 0; drop the lowest 5% of X1
    return (0.05, 1.0) if model_name == "example1" else (0.0, 1.0)


def default_nw_config(model_name: str) -> NWConfig:
    return NWConfig(DISCRETE_BANDWIDTH) if model_name == "example2" else NWConfig("auto")


def resolve_workers(workers: int | None = None) -> int:
    if workers is None:
        workers = os.cpu_count() or 1
    cap = os.environ.get(THREADS_ENV)
    if cap:
        workers = min(workers, max(1, int(cap)))
    return max(1, int(workers))


# ---------------------------------------------------------------------------
# estimators


class Estimator:
    """An estimator id bound to a model; evaluates curves with fallback flags.

    Ids: ``truth`` (the true curve, for testing), ``bayes-closed`` with an
    optional ``:variant`` suffix, ``bayes-grid`` and ``nadaraya-watson``.
    """

    def __init__(self, estimator_id: str, hyper: HyperParams, grid_size: int = DEFAULT_MC_SIZE, nw_config=None):
        base, _, variant = estimator_id.partition(":")
        if base not in ("truth", "bayes-closed", "bayes-grid", "nadaraya-watson"):
            raise UsageError(f"unknown estimator id {estimator_id!r}")
        if variant and base != "bayes-closed":
            raise UsageError(f"estimator {base!r} takes no variant")
        self.id = estimator_id
        self.base = base
        self.hyper = hyper
        self.model = hyper.model()
        self.prior = hyper.prior()
        self.variant = resolve_variant(hyper, variant or None) if base == "bayes-closed" else None
        self.grid_size = grid_size
        self.nw_config = nw_config or default_nw_config(hyper.name)

    @property
    def is_bayes(self) -> bool:
        return self.base == "bayes-grid" or (self.base == "bayes-closed" and self.variant == self.hyper.variants[0])

    def min_n(self) -> int:
        return 1 if self.base == "nadaraya-watson" else 0

    def curve(self, data: Dataset, x1s, theta: float):
        """Values at ``x1s`` and a mask of points that needed the fallback.

        On numerical failure a point falls back to the mean response of
        ``data``.
        """
        x1s = np.asarray(x1s, dtype=np.float64)
        out = np.empty(x1s.size)
        failed = np.zeros(x1s.size, dtype=bool)
        if self.base == "truth":
            out[:] = self.model.regression_curve(theta, x1s)
        elif self.base == "bayes-closed":
            stats = stats_from_data(self.hyper, data)
            for i, x in enumerate(x1s):
                out[i] = closed_form_regression(self.hyper, stats, x, self.variant)
        elif self.base == "bayes-grid":
            try:
                grid = build_grid(self.model, self.prior, data, self.grid_size)
                out[:] = curve_estimate(grid, self.model, x1s)
            except NumericalFailure:
                failed[:] = True
        else:
            for i, x in enumerate(x1s):
                try:
                    out[i] = nadaraya_watson(data, x, self.nw_config)
                except NumericalFailure:
                    failed[i] = True
        if failed.any() or not np.all(np.isfinite(out)):
            failed |= ~np.isfinite(out)
            if data.n == 0:
                raise ExperimentError(f"{self.id} failed on an empty sample")
            out[failed] = float(np.mean(data.x2))
        return out, failed


def _estimators(ids, hyper, grid_size, nw_config):
    if isinstance(ids, str):
        ids = [ids]
    if not ids:
        raise UsageError("at least one estimator id is required")
    return [Estimator(i, hyper, grid_size, nw_config) for i in ids]


def _check_schedule(n_schedule, estimators, strict=False):
    sched = [int(n) for n in n_schedule]
    if not sched:
        raise UsageError("n_schedule must not be empty")
    if any(n < 0 for n in sched):
        raise UsageError(f"sample sizes must be >= 0, got {sched}")
    if strict and any(b <= a for a, b in zip(sched, sched[1:])):
        raise UsageError(f"n_schedule must be strictly increasing, got {sched}")
    for est in estimators:
        if min(sched) < est.min_n():
            raise UsageError(f"{est.id} needs n >= {est.min_n()}, schedule has {min(sched)}")
    return sched


def _check_replications(replications):
    if int(replications) < 2:
        raise UsageError(f"replications must be >= 2, got {replications}")
    return int(replications)


def _run(fn, count, workers):
    workers = resolve_workers(workers)
    if workers == 1 or count == 1:
        return [fn(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(count)))


def _check_failures(fallbacks, replications, labels):
    for idx, count in np.ndenumerate(fallbacks):
        if count > MAX_FAILURE_RATE * replications:
            raise ExperimentError(
                f"{labels(idx)}: {int(count)} of {replications} replications needed the fallback "
                f"(limit {MAX_FAILURE_RATE:.0%})"
            )


def _mean_se(x, axis=0):
    # correctly rounded sums, so a cell's figures do not depend on which
    # other estimators or loss orders share the array
    x = np.moveaxis(np.asarray(x, dtype=np.float64), axis, -1)
    r = x.shape[-1]
    flat = x.reshape(-1, r)
    mean = np.empty(flat.shape[0])
    se = np.empty(flat.shape[0])
    for i, row in enumerate(flat):
        m = math.fsum(row) / r
        mean[i] = m
        se[i] = math.sqrt(math.fsum((row - m) ** 2) / (r - 1)) / math.sqrt(r)
    return mean.reshape(x.shape[:-1]), se.reshape(x.shape[:-1])


# ---------------------------------------------------------------------------
# risk


@dataclass(frozen=True)
class RiskRow:
    n: int
    loss_k: int
    estimator: str
    estimate: float
    mc_se: float
    replications: int
    trimmed: bool


@dataclass(frozen=True)
class RiskCurve:
    rows: tuple
    fallbacks: dict = field(default_factory=dict)

    def get(self, n: int, loss_k: int, estimator: str) -> RiskRow:
        for row in self.rows:
            if (row.n, row.loss_k, row.estimator) == (n, loss_k, estimator):
                return row
        raise KeyError((n, loss_k, estimator))


def _check_trim(trim):
    lo, hi = (float(t) for t in trim)
    if not 0.0 <= lo < hi <= 1.0:
        raise UsageError(f"trim quantiles must satisfy 0 <= lo < hi <= 1, got ({lo}, {hi})")
    return lo, hi


def _loss_ks(loss_k):
    ks = [loss_k] if isinstance(loss_k, (int, np.integer)) else list(loss_k)
    if not ks or any(int(k) not in (1, 2) for k in ks):
        raise UsageError(f"loss_k must be 1 or 2, got {loss_k!r}")
    return [int(k) for k in ks]


def _simulate_losses(hyper, estimators, sched, replications, ks, trim, seed, workers):
    """Per-replication losses, shape (R, E, N, K), and fallback flags (R, E, N)."""
    model, prior = hyper.model(), hyper.prior()
    tag = f"risk:{hyper.name}"
    n_max = max(sched)

    def one(i):
        rng = replication_rng(seed, tag, i)
        theta = float(prior.sample(rng))
        path = model.sample_pairs(theta, n_max, rng)
        x1 = model.sample_x1(theta, rng, trim)
        truth = float(model.regression_curve(theta, x1))
        losses = np.empty((len(estimators), len(sched), len(ks)))
        fails = np.zeros((len(estimators), len(sched)), dtype=np.int64)
        for e, est in enumerate(estimators):
            for j, n in enumerate(sched):
                val, failed = est.curve(path.prefix(n), [x1], theta)
                dev = abs(val[0] - truth)
                losses[e, j] = [dev**k for k in ks]
                fails[e, j] = int(failed[0])
        return losses, fails

    results = _run(one, replications, workers)
    losses = np.stack([r[0] for r in results])
    fails = np.stack([r[1] for r in results])
    return losses, fails


def bayes_risk(
    hyper: HyperParams,
    estimator_id: str | Sequence[str],
    n_schedule: Sequence[int],
    replications: int,
    loss_k: int | Sequence[int] = 2,
    trim: tuple[float, float] | None = None,
    seed: int = 0,
    grid_size: int = DEFAULT_MC_SIZE,
    nw_config: NWConfig | None = None,
    workers: int | None = None,
) -> RiskCurve:
    """Monte Carlo estimate of E|m(x', x1) - r_theta(x1)|^k for each n and k."""
    seed = check_seed(seed)
    estimators = _estimators(estimator_id, hyper, grid_size, nw_config)
    sched = _check_schedule(n_schedule, estimators)
    replications = _check_replications(replications)
    ks = _loss_ks(loss_k)
    trim = _check_trim(default_trim(hyper.name) if trim is None else trim)
    trimmed = trim != (0.0, 1.0)

    losses, fails = _simulate_losses(hyper, estimators, sched, replications, ks, trim, seed, workers)
    n_fail = fails.sum(axis=0)
    _check_failures(n_fail, replications, lambda idx: f"{estimators[idx[0]].id} at n={sched[idx[1]]}")
    est, se = _mean_se(losses)
    if not (np.all(np.isfinite(est)) and np.all(np.isfinite(se))):
        raise ExperimentError("non-finite risk estimate")

    rows = []
    for j, n in enumerate(sched):
        for q, k in enumerate(ks):
            for e, estimator in enumerate(estimators):
                rows.append(RiskRow(n, k, estimator.id, float(est[e, j, q]), float(se[e, j, q]), replications, trimmed))
    fallbacks = {f"{estimators[e].id}@{sched[j]}": int(n_fail[e, j]) for e in range(len(estimators)) for j in range(len(sched))}
    return RiskCurve(tuple(rows), fallbacks)


# ---------------------------------------------------------------------------
# comparison


@dataclass(frozen=True)
class ComparisonRow:
    n: int
    loss_k: int
    estimator: str
    estimate: float
    mc_se: float
    replications: int
    trimmed: bool
    paired_diff: float
    paired_se: float


@dataclass(frozen=True)
class ComparisonTable:
    """Risks on common draws; paired differences are against the first estimator."""

    rows: tuple
    reference: str
    violations: tuple
    fallbacks: dict = field(default_factory=dict)

    def get(self, estimator: str, loss_k: int | None = None) -> ComparisonRow:
        for row in self.rows:
            if row.estimator == estimator and (loss_k is None or row.loss_k == loss_k):
                return row
        raise KeyError(estimator)


def compare_estimators(
    hyper: HyperParams,
    estimator_ids: Sequence[str],
    n: int,
    replications: int,
    loss_k: int | Sequence[int] = 2,
    seed: int = 0,
    trim: tuple[float, float] | None = None,
    grid_size: int = DEFAULT_MC_SIZE,
    nw_config: NWConfig | None = None,
    workers: int | None = None,
) -> ComparisonTable:
    """Paired Monte Carlo comparison on common random numbers.

    When the first estimator is a Bayes estimator, any other estimator whose
    risk is lower by more than two paired standard errors is reported in
    ``violations``.
    """
    seed = check_seed(seed)
    if isinstance(estimator_ids, str) or len(estimator_ids) < 2:
        raise UsageError("compare needs at least two estimator ids")
    estimators = _estimators(estimator_ids, hyper, grid_size, nw_config)
    sched = _check_schedule([n], estimators)
    replications = _check_replications(replications)
    ks = _loss_ks(loss_k)
    trim = _check_trim(default_trim(hyper.name) if trim is None else trim)
    trimmed = trim != (0.0, 1.0)

    losses, fails = _simulate_losses(hyper, estimators, sched, replications, ks, trim, seed, workers)
    n_fail = fails.sum(axis=0)
    _check_failures(n_fail, replications, lambda idx: f"{estimators[idx[0]].id} at n={n}")
    losses = losses[:, :, 0, :]  # (R, E, K)
    est, se = _mean_se(losses)
    diffs = losses - losses[:, :1, :]
    pdiff, pse = _mean_se(diffs)
    if not all(np.all(np.isfinite(a)) for a in (est, se, pdiff, pse)):
        raise ExperimentError("non-finite comparison estimate")

    rows, violations = [], []
    ref = estimators[0]
    for q, k in enumerate(ks):
        for e, estimator in enumerate(estimators):
            rows.append(
                ComparisonRow(
                    int(n), k, estimator.id, float(est[e, q]), float(se[e, q]), replications, trimmed,
                    float(pdiff[e, q]), float(pse[e, q]),
                )
            )
            if e > 0 and ref.is_bayes and pdiff[e, q] < -2.0 * pse[e, q]:
                violations.append((estimator.id, k))
    fallbacks = {est.id: int(n_fail[e, 0]) for e, est in enumerate(estimators)}
    return ComparisonTable(tuple(rows), ref.id, tuple(violations), fallbacks)


# ---------------------------------------------------------------------------
# consistency paths


@dataclass(frozen=True)
class PathReport:
    """Deviations |m_n(x1) - r_theta(x1)| along growing sample paths.

    ``deviations`` has shape (replications, len(n_schedule), len(x1_eval));
    ``max_deviation`` is its maximum over evaluation points.
    """

    estimator: str
    n_schedule: tuple
    x1_eval: tuple
    thetas: np.ndarray
    deviations: np.ndarray
    fallbacks: dict = field(default_factory=dict)

    @property
    def replications(self) -> int:
        return int(self.thetas.size)

    @property
    def max_deviation(self) -> np.ndarray:
        return self.deviations.max(axis=2)

    def quantiles(self, q=(0.1, 0.5, 0.9)) -> np.ndarray:
        """Cross-replication quantiles of the max deviation, shape (len(q), N)."""
        return np.quantile(self.max_deviation, q, axis=0)

    def median_max_deviation(self) -> np.ndarray:
        return np.median(self.max_deviation, axis=0)

    def median_deviation(self) -> np.ndarray:
        """Per-point medians, shape (N, P)."""
        return np.median(self.deviations, axis=0)

    def fraction_within(self, tol: float) -> np.ndarray:
        return (self.max_deviation <= tol).mean(axis=0)


def consistency_paths(
    hyper: HyperParams,
    estimator_id: str,
    n_schedule: Sequence[int],
    replications: int,
    x1_eval: Sequence[float],
    seed: int = 0,
    grid_size: int = DEFAULT_MC_SIZE,
    nw_config: NWConfig | None = None,
    workers: int | None = None,
) -> PathReport:
    seed = check_seed(seed)
    (est,) = _estimators([estimator_id], hyper, grid_size, nw_config)
    sched = _check_schedule(n_schedule, [est], strict=True)
    replications = _check_replications(replications)
    model, prior = hyper.model(), hyper.prior()
    x1_eval = tuple(model.check_x1(x) for x in x1_eval)
    if not x1_eval:
        raise UsageError("x1_eval must not be empty")
    xs = np.array(x1_eval)
    tag = f"paths:{hyper.name}"
    n_max = max(sched)

    def one(i):
        rng = replication_rng(seed, tag, i)
        theta = float(prior.sample(rng))
        path = model.sample_pairs(theta, n_max, rng)
        truth = np.asarray(model.regression_curve(theta, xs), dtype=np.float64)
        dev = np.empty((len(sched), xs.size))
        fails = np.zeros(len(sched), dtype=np.int64)
        for j, n in enumerate(sched):
            val, failed = est.curve(path.prefix(n), xs, theta)
            dev[j] = np.abs(val - truth)
            fails[j] = int(failed.any())
        return theta, dev, fails

    results = _run(one, replications, workers)
    thetas = np.array([r[0] for r in results])
    devs = np.stack([r[1] for r in results])
    n_fail = np.stack([r[2] for r in results]).sum(axis=0)
    _check_failures(n_fail, replications, lambda idx: f"{est.id} at n={sched[idx[0]]}")
    if not np.all(np.isfinite(devs)):
        raise ExperimentError("non-finite deviation in consistency paths")
    fallbacks = {f"{est.id}@{n}": int(c) for n, c in zip(sched, n_fail)}
    return PathReport(est.id, tuple(sched), x1_eval, thetas, devs, fallbacks)
