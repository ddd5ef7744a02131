"""Nadaraya-Watson kernel regression, the frequentist comparison baseline."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NoMassError, UsageError
from .kernels import nw_sums
from .models import Dataset

MIN_BANDWIDTH = 1e-6
MIN_DENOMINATOR = 1e-300
# bandwidth used for binary predictors: reduces the estimator to per-cell means
DISCRETE_BANDWIDTH = 1e-4


@dataclass(frozen=True)
class NWConfig:
    bandwidth: float | str = "auto"
    kernel: str = "gaussian"

    def __post_init__(self):
        if self.kernel != "gaussian":
            raise UsageError(f"unsupported kernel {self.kernel!r}; only 'gaussian' is available")
        if self.bandwidth != "auto":
            if isinstance(self.bandwidth, str) or not (math.isfinite(self.bandwidth) and self.bandwidth > 0):
                raise UsageError(f"bandwidth must be a positive number or 'auto', got {self.bandwidth!r}")


def silverman_bandwidth(x: np.ndarray) -> float:
    """1.06 * sd * n^(-1/5), floored at MIN_BANDWIDTH."""
    n = x.size
    sd = float(np.std(x, ddof=1)) if n > 1 else 0.0
    return max(1.06 * sd * n ** (-0.2), MIN_BANDWIDTH)


def resolve_bandwidth(data: Dataset, config: NWConfig) -> float:
    if config.bandwidth == "auto":
        return silverman_bandwidth(data.x1)
    return float(config.bandwidth)


def nadaraya_watson(data: Dataset, x1: float, config: NWConfig = NWConfig()) -> float:
    """Gaussian-kernel weighted mean of the responses around ``x1``."""
    if data.n < 1:
        raise UsageError("Nadaraya-Watson needs at least one observation")
    h = resolve_bandwidth(data, config)
    num, den = nw_sums(data.x1, data.x2, float(x1), h)
    if not den >= MIN_DENOMINATOR:
        raise NoMassError(f"kernel weights vanish at x1={x1} (bandwidth {h:g})")
    return num / den
