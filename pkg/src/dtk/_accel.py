"""Hot numeric kernels, numba-compiled with a pure-numpy fallback.

Set ``DTK_NO_NUMBA=1`` to force the numpy path (useful for debugging and for
the benchmark in ``benchmarks/accel_benchmark.py``). When numba is missing
the fallback is selected automatically.
"""
from __future__ import annotations

import os

import numpy as np

_DISABLED = os.environ.get("DTK_NO_NUMBA", "").lower() in ("1", "true", "yes")

USING_NUMBA = False
if not _DISABLED:
    try:
        from numba import njit

        USING_NUMBA = True
    except ImportError:  # pragma: no cover
        pass


def _conv_direct_numpy(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    d = a.shape[0]
    full = np.convolve(a, b)
    out = full[:d].copy()
    if d > 1:
        out[: d - 1] += full[d:]
    return out


if USING_NUMBA:

    @njit(cache=True, fastmath=True)
    def _conv_direct_numba(a, b):  # pragma: no cover - exercised via wrapper
        d = a.shape[0]
        # Sliding-dot formulation over locally allocated copies: the fresh
        # arrays cannot alias, so LLVM vectorizes the inner reduction.
        # out[k] = sum_i a[i] * b[(k - i) % d] = dot(reversed(a), bb[k+1:k+1+d])
        # where bb is b tiled twice.
        ar = a[::-1].copy()
        bb = np.empty(2 * d)
        bb[:d] = b
        bb[d:] = b
        out = np.empty(d)
        for k in range(d):
            acc = 0.0
            for i in range(d):
                acc += ar[i] * bb[k + 1 + i]
            out[k] = acc
        return out

    conv_direct = _conv_direct_numba
else:
    conv_direct = _conv_direct_numpy
