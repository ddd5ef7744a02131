"""Kernel backend selection.

The compiled extension ``_ckernels`` is used when it imports; otherwise the
numpy implementations in ``_pykernels`` are used.  Set
``BAYES_REGRESS_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _pykernels

if os.environ.get("BAYES_REGRESS_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels
        BACKEND = "python"

logsumexp = _impl.logsumexp
signed_logsumexp = _impl.signed_logsumexp
compensated_sum = _impl.compensated_sum
nw_sums = _impl.nw_sums

__all__ = ["BACKEND", "logsumexp", "signed_logsumexp", "compensated_sum", "nw_sums"]
