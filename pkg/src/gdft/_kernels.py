"""Inner loops of the transforms.

Each kernel has a numba version and a numpy version with the same
signature.  Numba is used when it imports and ``GDFT_DISABLE_NUMBA`` is not
set to a true value; both variants stay reachable through ``NUMPY`` and
``NUMBA`` for benchmarking.
"""
from __future__ import annotations

import os

import numpy as np

__all__ = ["dft_accumulate", "trace_products", "scatter_add", "USING_NUMBA", "NUMPY", "NUMBA"]


def _np_dft_accumulate(coeffs: np.ndarray, mats: np.ndarray) -> np.ndarray:
    nz = np.flatnonzero(coeffs)
    if nz.size == 0:
        return np.zeros(mats.shape[1:], dtype=np.complex128)
    return np.tensordot(coeffs[nz], mats[nz], axes=1)


def _np_trace_products(mats: np.ndarray, M: np.ndarray) -> np.ndarray:
    # out[g] = trace(mats[g] @ M)
    return np.einsum("gij,ji->g", mats, M)


def _np_scatter_add(target: np.ndarray, index: np.ndarray, values: np.ndarray) -> None:
    np.add.at(target, index, values)


NUMPY = {
    "dft_accumulate": _np_dft_accumulate,
    "trace_products": _np_trace_products,
    "scatter_add": _np_scatter_add,
}
NUMBA: dict = {}

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is optional
    njit = None

if njit is not None:

    @njit(cache=True)
    def _nb_dft_accumulate(coeffs, mats):
        n, d, _ = mats.shape
        out = np.zeros((d, d), dtype=np.complex128)
        for g in range(n):
            a = coeffs[g]
            if a == 0:
                continue
            for i in range(d):
                for j in range(d):
                    out[i, j] += a * mats[g, i, j]
        return out

    @njit(cache=True)
    def _nb_trace_products(mats, M):
        n, d, _ = mats.shape
        out = np.zeros(n, dtype=np.complex128)
        for g in range(n):
            acc = 0j
            for i in range(d):
                for j in range(d):
                    acc += mats[g, i, j] * M[j, i]
            out[g] = acc
        return out

    @njit(cache=True)
    def _nb_scatter_add(target, index, values):
        for k in range(index.shape[0]):
            target[index[k]] += values[k]

    NUMBA = {
        "dft_accumulate": _nb_dft_accumulate,
        "trace_products": _nb_trace_products,
        "scatter_add": _nb_scatter_add,
    }

USING_NUMBA = bool(NUMBA) and os.environ.get("GDFT_DISABLE_NUMBA", "").lower() not in ("1", "true", "yes")
_active = NUMBA if USING_NUMBA else NUMPY

dft_accumulate = _active["dft_accumulate"]
trace_products = _active["trace_products"]
scatter_add = _active["scatter_add"]
