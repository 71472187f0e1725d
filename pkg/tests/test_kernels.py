import os
import subprocess
import sys

import numpy as np
import pytest
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, dijkstra as sp_dijkstra

from confdim import _kernels_py, kernels

compiled = pytest.importorskip("confdim._kernels")


def random_csr(rng, n, m, int_weights=False):
    tail = rng.integers(0, n, m)
    head = rng.integers(0, n, m)
    w = rng.integers(1, 4, m).astype(float) if int_weights else rng.random(m) + 0.01
    order = np.lexsort((head, tail))
    tail, head, w = tail[order], head[order], w[order]
    indptr = np.searchsorted(tail, np.arange(n + 1)).astype(np.int64)
    return indptr, head.astype(np.int64), w


@pytest.mark.parametrize("seed", range(8))
def test_dijkstra_parity(seed):
    rng = np.random.default_rng(seed)
    n = 40
    indptr, indices, w = random_csr(rng, n, 120, int_weights=seed % 2 == 0)
    src = np.array([0, 5], dtype=np.int64)
    d0 = np.array([0.0, 0.5])
    dc, pc = compiled.dijkstra_csr(indptr, indices, w, src, d0)
    dp, pp = _kernels_py.dijkstra_csr(indptr, indices, w, src, d0)
    assert np.array_equal(dc, dp) and np.array_equal(pc, pp)
    # independent oracle: scipy from a super-source
    mat = np.full((n + 1, n + 1), np.inf)
    for u in range(n):
        for k in range(indptr[u], indptr[u + 1]):
            mat[u, indices[k]] = min(mat[u, indices[k]], w[k])
    mat[n, 0], mat[n, 5] = 1e-300, 0.5
    mat[np.isinf(mat)] = 0
    ref = sp_dijkstra(csr_matrix(mat), indices=n)[:n]
    assert np.allclose(dc, ref, atol=1e-12)


@pytest.mark.parametrize("seed", range(8))
def test_union_find_parity(seed):
    rng = np.random.default_rng(100 + seed)
    n = 60
    a, b = rng.integers(0, n, 35), rng.integers(0, n, 35)
    lc = compiled.union_find_labels(n, a.astype(np.int64), b.astype(np.int64))
    lp = _kernels_py.union_find_labels(n, a.astype(np.int64), b.astype(np.int64))
    assert np.array_equal(np.asarray(lc), lp)
    k, lab = connected_components(csr_matrix((np.ones(35), (a, b)), shape=(n, n)), directed=False)
    assert len(set(lp.tolist())) == k
    for x in range(n):
        assert lp[x] == min(np.flatnonzero(lab == lab[x]))


def test_wrapper_uses_compiled():
    assert kernels.BACKEND == "compiled"


def test_pure_python_env_switch():
    env = dict(os.environ, CONFDIM_PURE_PYTHON="1")
    code = ("from confdim import kernels; from confdim.conformal import critical_exponent;"
            "from confdim.igs import load_spec; print(kernels.BACKEND,"
            " round(critical_exponent(load_spec('fig5_left')).q_star, 8))")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split() == ["python", "1.5"]
