"""Pure-Python (numpy) implementations of the numerical kernels.

Mirrors ``_ckernels.pyx`` function for function; selected by ``kernels``
when the compiled extension is unavailable or disabled.
"""

import math

import numpy as np


def logsumexp(a):
    a = np.asarray(a, dtype=np.float64)
    if a.size == 0:
        return -math.inf
    m = a.max()
    if m == -math.inf:
        return -math.inf
    if math.isnan(m) or m == math.inf:
        return float(m)
    return float(m + math.log(np.exp(a - m).sum()))


def signed_logsumexp(logmag, sign):
    """log|sum_j sign_j exp(logmag_j)| and the sign of that sum.

    Positive and negative parts are accumulated separately against a
    shared maximum.  Returns ``(-inf, 0.0)`` for an exactly zero sum.
    """
    logmag = np.asarray(logmag, dtype=np.float64)
    sign = np.asarray(sign, dtype=np.float64)
    live = (sign != 0.0) & (logmag > -math.inf)
    if not live.any():
        return -math.inf, 0.0
    lm = logmag[live]
    sg = sign[live]
    m = lm.max()
    if math.isnan(m) or m == math.inf:
        return float(m), 1.0
    e = np.exp(lm - m)
    pos = e[sg > 0].sum()
    neg = e[sg < 0].sum()
    diff = pos - neg
    if diff == 0.0:
        return -math.inf, 0.0
    return float(m + math.log(abs(diff))), (1.0 if diff > 0 else -1.0)


def compensated_sum(a):
    return math.fsum(np.asarray(a, dtype=np.float64).tolist())


def nw_sums(x, y, x0, h):
    """Gaussian-kernel numerator and denominator of the Nadaraya-Watson ratio."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    u = (x0 - x) / h
    k = np.exp(-0.5 * u * u)
    return float(k @ y), float(k.sum())
