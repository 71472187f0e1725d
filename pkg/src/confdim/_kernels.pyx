# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: multi-source Dijkstra and union-find labelling."""
import numpy as np
cimport numpy as cnp
from libcpp.queue cimport priority_queue
from libcpp.pair cimport pair

cnp.import_array()


def dijkstra_csr(const cnp.int64_t[::1] indptr, const cnp.int64_t[::1] indices,
                 const double[::1] weights, const cnp.int64_t[::1] sources,
                 const double[::1] source_dist):
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef cnp.ndarray[double, ndim=1] dist_arr = np.full(n, np.inf)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] pred_arr = np.full(n, -1, dtype=np.int64)
    cdef double[::1] dist = dist_arr
    cdef cnp.int64_t[::1] pred = pred_arr
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] done_arr = np.zeros(n, dtype=np.uint8)
    cdef cnp.uint8_t[::1] done = done_arr
    # max-heap on (-dist, -node) pops smallest distance, then smallest node
    cdef priority_queue[pair[double, cnp.int64_t]] heap
    cdef Py_ssize_t i, k
    cdef cnp.int64_t u, v
    cdef double d, nd
    for i in range(sources.shape[0]):
        u = sources[i]
        if source_dist[i] < dist[u]:
            dist[u] = source_dist[i]
            pred[u] = -1
            heap.push(pair[double, cnp.int64_t](-source_dist[i], -u))
    while not heap.empty():
        d = -heap.top().first
        u = -heap.top().second
        heap.pop()
        if done[u]:
            continue
        done[u] = 1
        for k in range(indptr[u], indptr[u + 1]):
            v = indices[k]
            nd = d + weights[k]
            if nd < dist[v]:
                dist[v] = nd
                pred[v] = k
                heap.push(pair[double, cnp.int64_t](-nd, -v))
    return dist_arr, pred_arr


cdef inline cnp.int64_t _find(cnp.int64_t[::1] parent, cnp.int64_t x) nogil:
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


def union_find_labels(Py_ssize_t n, const cnp.int64_t[::1] a, const cnp.int64_t[::1] b):
    cdef cnp.ndarray[cnp.int64_t, ndim=1] parent_arr = np.arange(n, dtype=np.int64)
    cdef cnp.int64_t[::1] parent = parent_arr
    cdef Py_ssize_t i
    cdef cnp.int64_t rx, ry
    with nogil:
        for i in range(a.shape[0]):
            rx = _find(parent, a[i])
            ry = _find(parent, b[i])
            if rx != ry:
                if rx < ry:
                    parent[ry] = rx
                else:
                    parent[rx] = ry
        for i in range(n):
            parent[i] = _find(parent, i)
    return parent_arr
