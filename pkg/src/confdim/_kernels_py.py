"""Pure-Python reference versions of the hot kernels.

Signatures and outputs match ``confdim._kernels`` exactly, including the
tie-breaking of the heap (by distance, then node index).
"""
from __future__ import annotations

import heapq

import numpy as np


def dijkstra_csr(indptr, indices, weights, sources, source_dist):
    """Multi-source Dijkstra on a CSR adjacency.

    Returns ``(dist, pred_arc)`` where ``pred_arc[v]`` is the CSR arc index
    used to reach ``v`` (``-1`` for sources and unreached nodes).
    """
    n = len(indptr) - 1
    ip = indptr.tolist()
    ix = indices.tolist()
    wt = weights.tolist()
    dist = [float("inf")] * n
    pred = [-1] * n
    done = [False] * n
    heap = []
    for s, d0 in zip(sources.tolist(), source_dist.tolist()):
        if d0 < dist[s]:
            dist[s] = d0
            pred[s] = -1
            heap.append((d0, s))
    heapq.heapify(heap)
    while heap:
        d, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        for k in range(ip[u], ip[u + 1]):
            v = ix[k]
            nd = d + wt[k]
            if nd < dist[v]:
                dist[v] = nd
                pred[v] = k
                heapq.heappush(heap, (nd, v))
    return np.array(dist, dtype=np.float64), np.array(pred, dtype=np.int64)


def union_find_labels(n, a, b):
    """Label each of ``n`` elements by the smallest element of its class."""
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for x, y in zip(a.tolist(), b.tolist()):
        rx, ry = find(x), find(y)
        if rx != ry:
            if rx < ry:
                parent[ry] = rx
            else:
                parent[rx] = ry
    return np.array([find(x) for x in range(n)], dtype=np.int64)
