"""Kernel selection: the compiled extension when importable, else pure Python.

Set ``CONFDIM_PURE_PYTHON=1`` to force the fallback.
"""
from __future__ import annotations

import os

import numpy as np

from . import _kernels_py

_compiled = None
if not os.environ.get("CONFDIM_PURE_PYTHON"):
    try:
        from . import _kernels as _compiled  # type: ignore[no-redef]
    except ImportError:  # pragma: no cover - depends on build
        _compiled = None

_impl = _compiled if _compiled is not None else _kernels_py
BACKEND = "compiled" if _compiled is not None else "python"


def dijkstra_csr(indptr, indices, weights, sources, source_dist=None):
    indptr = np.ascontiguousarray(indptr, dtype=np.int64)
    indices = np.ascontiguousarray(indices, dtype=np.int64)
    weights = np.ascontiguousarray(weights, dtype=np.float64)
    sources = np.ascontiguousarray(sources, dtype=np.int64)
    if source_dist is None:
        source_dist = np.zeros(len(sources))
    source_dist = np.ascontiguousarray(source_dist, dtype=np.float64)
    return _impl.dijkstra_csr(indptr, indices, weights, sources, source_dist)


def union_find_labels(n, a, b):
    a = np.ascontiguousarray(a, dtype=np.int64)
    b = np.ascontiguousarray(b, dtype=np.int64)
    return _impl.union_find_labels(int(n), a, b)
