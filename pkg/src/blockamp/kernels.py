"""Hot numeric kernels with a numba backend and a pure-numpy fallback.

The backend is chosen once at import time from the environment variable
``BLOCKAMP_BACKEND`` (``"numba"`` or ``"numpy"``, default ``"numba"``).  If
numba is unavailable the numpy path is used silently.  Each backend is
deterministic on its own (fixed summation order, no threading in the
kernels); the two backends agree to floating-point roundoff, not bitwise.

All kernels assume a contiguous block partition described by `starts`, the
cumulative block boundaries (length q+1).

Run ``python benchmarks/bench_kernels.py`` to compare the two backends.
"""

from __future__ import annotations

import math
import os

import numpy as np

BACKEND = os.environ.get("BLOCKAMP_BACKEND", "numba").lower()
if BACKEND not in ("numba", "numpy"):
    raise ValueError(f"BLOCKAMP_BACKEND must be 'numba' or 'numpy', got {BACKEND!r}")


# ---------------------------------------------------------------------------
# numpy reference implementations
# ---------------------------------------------------------------------------

def _scaled_block_matvec_numpy(y, v, starts, weights):
    n = y.shape[0]
    q = len(starts) - 1
    out = np.zeros(n)
    for b in range(q):
        rows = slice(starts[b], starts[b + 1])
        acc = np.zeros(starts[b + 1] - starts[b])
        for a in range(q):
            cols = slice(starts[a], starts[a + 1])
            acc += weights[b, a] * (y[rows, cols] @ v[cols])
        out[rows] = acc
    return out


def _block_sums_numpy(v, starts):
    q = len(starts) - 1
    return np.array([v[starts[a]:starts[a + 1]].sum() for a in range(q)])


def _rademacher_denoise_numpy(r, mu, sigma2):
    f = np.tanh(mu * r / sigma2)
    fp = (mu / sigma2) * (1.0 - f * f)
    return f, fp


def _sparse_rademacher_denoise_numpy(r, mu, sigma2, rho):
    # Three-atom posterior at 0 and +-1/sqrt(rho); the shared exp(-r^2/2s2)
    # factor cancels in the Bayes ratio, the remaining exponents are shifted
    # by their max for overflow safety.
    s = 1.0 / math.sqrt(rho)
    u = mu * s * r / sigma2
    v = mu * mu * s * s / (2.0 * sigma2)
    m = np.maximum(np.maximum(u - v, -u - v), 0.0)
    ep = 0.5 * rho * np.exp(u - v - m)
    em = 0.5 * rho * np.exp(-u - v - m)
    e0 = (1.0 - rho) * np.exp(-m)
    den = e0 + ep + em
    f = s * (ep - em) / den
    second = s * s * (ep + em) / den
    fp = (mu / sigma2) * (second - f * f)
    return f, fp


# ---------------------------------------------------------------------------
# numba implementations
# ---------------------------------------------------------------------------

_HAVE_NUMBA = False
if BACKEND == "numba":
    try:
        import numba as _nb

        _HAVE_NUMBA = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        _HAVE_NUMBA = False

if _HAVE_NUMBA:

    @_nb.njit(cache=True, parallel=False)
    def _scaled_block_matvec_numba(y, v, starts, weights):
        n = y.shape[0]
        q = starts.shape[0] - 1
        out = np.zeros(n)
        for b in range(q):
            for i in range(starts[b], starts[b + 1]):
                acc = 0.0
                for a in range(q):
                    s = 0.0
                    for j in range(starts[a], starts[a + 1]):
                        s += y[i, j] * v[j]
                    acc += weights[b, a] * s
                out[i] = acc
        return out

    @_nb.njit(cache=True)
    def _block_sums_numba(v, starts):
        q = starts.shape[0] - 1
        out = np.zeros(q)
        for a in range(q):
            s = 0.0
            for j in range(starts[a], starts[a + 1]):
                s += v[j]
            out[a] = s
        return out

    @_nb.njit(cache=True)
    def _rademacher_denoise_numba(r, mu, sigma2):
        n = r.shape[0]
        f = np.empty(n)
        fp = np.empty(n)
        k = mu / sigma2
        for i in range(n):
            t = math.tanh(k * r[i])
            f[i] = t
            fp[i] = k * (1.0 - t * t)
        return f, fp

    @_nb.njit(cache=True)
    def _sparse_rademacher_denoise_numba(r, mu, sigma2, rho):
        n = r.shape[0]
        f = np.empty(n)
        fp = np.empty(n)
        s = 1.0 / math.sqrt(rho)
        v = mu * mu * s * s / (2.0 * sigma2)
        k = mu * s / sigma2
        for i in range(n):
            u = k * r[i]
            m = max(max(u - v, -u - v), 0.0)
            ep = 0.5 * rho * math.exp(u - v - m)
            em = 0.5 * rho * math.exp(-u - v - m)
            e0 = (1.0 - rho) * math.exp(-m)
            den = e0 + ep + em
            fi = s * (ep - em) / den
            second = s * s * (ep + em) / den
            f[i] = fi
            fp[i] = (mu / sigma2) * (second - fi * fi)
        return f, fp

    scaled_block_matvec = _scaled_block_matvec_numba
    block_sums = _block_sums_numba
    rademacher_denoise = _rademacher_denoise_numba
    sparse_rademacher_denoise = _sparse_rademacher_denoise_numba
else:
    scaled_block_matvec = _scaled_block_matvec_numpy
    block_sums = _block_sums_numpy
    rademacher_denoise = _rademacher_denoise_numpy
    sparse_rademacher_denoise = _sparse_rademacher_denoise_numpy
