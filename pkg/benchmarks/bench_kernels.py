"""Compare the compiled kernels with the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 20]

Also times one end-to-end risk run under each backend (in a subprocess,
since the backend is chosen at import).
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from bayes_regress import _pykernels

try:
    from bayes_regress import _ckernels
except ImportError:
    _ckernels = None

END_TO_END = """
import time
from bayes_regress import BACKEND, Example3Hyper, bayes_risk
t = time.perf_counter()
bayes_risk(Example3Hyper(), ["bayes-grid", "nadaraya-watson"], [20, 80], 200, [1, 2], seed=1, workers=1)
print(BACKEND, time.perf_counter() - t)
"""


def cases(rng):
    x = rng.normal(size=4096)
    big = rng.normal(size=200_000)
    y = rng.normal(size=200_000)
    sign = np.where(rng.random(4096) < 0.5, -1.0, 1.0)
    return {
        "logsumexp[4096]": lambda k: k.logsumexp(x),
        "signed_logsumexp[4096]": lambda k: k.signed_logsumexp(x, sign),
        "compensated_sum[200k]": lambda k: k.compensated_sum(big),
        "nw_sums[200k]": lambda k: k.nw_sums(big, y, 0.3, 0.2),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    print(f"{'kernel':<26}{'python ms':>12}{'cython ms':>12}{'speedup':>10}")
    for name, fn in cases(rng).items():
        py = min(timeit.repeat(lambda: fn(_pykernels), number=1, repeat=args.repeat)) * 1e3
        if _ckernels is None:
            print(f"{name:<26}{py:>12.3f}{'n/a':>12}")
            continue
        cy = min(timeit.repeat(lambda: fn(_ckernels), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:<26}{py:>12.3f}{cy:>12.3f}{py / cy:>9.1f}x")

    print("\nend-to-end risk run (example3, bayes-grid + NW, 200 reps):")
    for forced in ("0", "1"):
        env = dict(os.environ, BAYES_REGRESS_PURE_PYTHON=forced)
        out = subprocess.run([sys.executable, "-c", END_TO_END], env=env, capture_output=True, text=True, check=True)
        backend, secs = out.stdout.split()
        print(f"  {backend:<8}{float(secs):8.2f} s")


if __name__ == "__main__":
    main()
