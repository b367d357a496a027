"""Hot loops, compiled with numba when available.

Set ``BLFORM_DISABLE_JIT=1`` to force the pure numpy versions.  Both
backends compute the same sums; the numpy path materialises the full
product array while the compiled path streams it.
"""

from __future__ import annotations

import math
import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover
    numba = None

_backend = "numpy"


def _env_backend() -> str:
    if os.environ.get("BLFORM_DISABLE_JIT", "").strip() not in ("", "0"):
        return "numpy"
    return "numba" if numba is not None else "numpy"


def backend() -> str:
    return _backend


def set_backend(name: str) -> None:
    global _backend
    if name not in ("numba", "numpy"):
        raise ValueError("backend must be 'numba' or 'numpy'")
    if name == "numba" and numba is None:
        raise RuntimeError("numba is not installed")
    _backend = name


_backend = _env_backend()

if numba is not None:
    threads = os.environ.get("BLFORM_THREADS")
    if threads:
        numba.set_num_threads(max(1, min(int(threads), numba.config.NUMBA_NUM_THREADS)))


# -- numpy versions ---------------------------------------------------------------


def _contract_np(factors, weights, kern):
    prod = factors[0]
    for f in factors[1:]:
        prod = prod * f
    inner = np.tensordot(prod, weights, axes=([1, 2], [0, 1]))
    return complex(np.dot(kern, inner))


def _fourier_np(ts, xi, w):
    out = np.empty(ts.size, dtype=complex)
    step = max(1, 2_000_000 // max(xi.size, 1))
    for s in range(0, ts.size, step):
        out[s : s + step] = np.exp(2j * math.pi * np.outer(ts[s : s + step], xi)) @ w
    return out


# -- compiled versions -------------------------------------------------------------

if numba is not None:

    @numba.njit(cache=True, nogil=True)
    def _contract1(a, w, k):
        acc = 0j
        for t in range(a.shape[0]):
            s = 0j
            for i in range(w.shape[0]):
                for j in range(w.shape[1]):
                    s += w[i, j] * a[t, i, j]
            acc += k[t] * s
        return acc

    @numba.njit(cache=True, nogil=True)
    def _contract2(a, b, w, k):
        acc = 0j
        for t in range(a.shape[0]):
            s = 0j
            for i in range(w.shape[0]):
                for j in range(w.shape[1]):
                    s += w[i, j] * a[t, i, j] * b[t, i, j]
            acc += k[t] * s
        return acc

    @numba.njit(cache=True, nogil=True)
    def _contract3(a, b, c, w, k):
        acc = 0j
        for t in range(a.shape[0]):
            s = 0j
            for i in range(w.shape[0]):
                for j in range(w.shape[1]):
                    s += w[i, j] * a[t, i, j] * b[t, i, j] * c[t, i, j]
            acc += k[t] * s
        return acc

    @numba.njit(cache=True, nogil=True)
    def _fourier_nb(ts, xi, w):
        out = np.empty(ts.size, dtype=np.complex128)
        for n in range(ts.size):
            s = 0j
            for k in range(xi.size):
                ph = 2.0 * math.pi * xi[k] * ts[n]
                s += w[k] * complex(math.cos(ph), math.sin(ph))
            out[n] = s
        return out


def contract(factors, weights, kern) -> complex:
    """sum_t kern[t] sum_{i,j} weights[i,j] prod_f f[t,i,j].

    ``factors`` are arrays broadcastable to (len(kern),) + weights.shape.
    """
    if not factors:
        raise ValueError("need at least one factor")
    kern = np.asarray(kern)
    weights = np.asarray(weights)
    if _backend == "numpy" or len(factors) > 3:
        return _contract_np(factors, weights, kern)
    shape = (kern.shape[0],) + weights.shape
    arrs = [np.broadcast_to(f, shape) for f in factors]
    if len(arrs) == 1:
        return complex(_contract1(arrs[0], weights, kern))
    if len(arrs) == 2:
        return complex(_contract2(arrs[0], arrs[1], weights, kern))
    return complex(_contract3(arrs[0], arrs[1], arrs[2], weights, kern))


def fourier_synthesis(ts, xi, w) -> np.ndarray:
    """sum_k w[k] exp(2 pi i xi[k] t) at every t."""
    ts = np.ascontiguousarray(ts, dtype=float)
    xi = np.ascontiguousarray(xi, dtype=float)
    w = np.ascontiguousarray(w, dtype=float)
    if _backend == "numba":
        return _fourier_nb(ts, xi, w)
    return _fourier_np(ts, xi, w)
