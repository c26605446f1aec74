# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled tree kernels: all-pairs BFS distances, subtree sizes, and the
bottom-up label recursion.  Mirrors ``_treekern_py`` exactly."""

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND = "cython"


def tree_spd(parent_index):
    cdef cnp.ndarray[cnp.int32_t, ndim=1] parent = np.ascontiguousarray(parent_index, dtype=np.int32)
    cdef int n = parent.shape[0]
    cdef cnp.ndarray[cnp.int32_t, ndim=2] dist = np.full((n, n), -1, dtype=np.int32)

    # CSR adjacency of the undirected tree (2*(n-1) arcs).
    cdef cnp.ndarray[cnp.int32_t, ndim=1] deg = np.zeros(n, dtype=np.int32)
    cdef int i, p
    for i in range(n):
        p = parent[i]
        if p >= 0:
            deg[i] += 1
            deg[p] += 1
    cdef cnp.ndarray[cnp.int32_t, ndim=1] indptr = np.zeros(n + 1, dtype=np.int32)
    for i in range(n):
        indptr[i + 1] = indptr[i] + deg[i]
    cdef cnp.ndarray[cnp.int32_t, ndim=1] cursor = indptr[:n].copy()
    cdef cnp.ndarray[cnp.int32_t, ndim=1] indices = np.empty(indptr[n], dtype=np.int32)
    for i in range(n):
        p = parent[i]
        if p >= 0:
            indices[cursor[i]] = p
            cursor[i] += 1
            indices[cursor[p]] = i
            cursor[p] += 1

    cdef cnp.ndarray[cnp.int32_t, ndim=1] queue = np.empty(n, dtype=np.int32)
    cdef int src, head, tail, u, v, k, d
    for src in range(n):
        dist[src, src] = 0
        queue[0] = src
        head = 0
        tail = 1
        while head < tail:
            u = queue[head]
            head += 1
            d = dist[src, u]
            for k in range(indptr[u], indptr[u + 1]):
                v = indices[k]
                if dist[src, v] < 0:
                    dist[src, v] = d + 1
                    queue[tail] = v
                    tail += 1
    return np.asarray(dist)


def subtree_sizes(parent_index, depth):
    cdef cnp.ndarray[cnp.int32_t, ndim=1] parent = np.ascontiguousarray(parent_index, dtype=np.int32)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] order = np.argsort(np.asarray(depth), kind="stable")[::-1].astype(np.int64)
    cdef int n = parent.shape[0]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] sizes = np.ones(n, dtype=np.int64)
    cdef int k, i, p
    for k in range(n):
        i = <int>order[k]
        p = parent[i]
        if p >= 0:
            sizes[p] += sizes[i]
    return np.asarray(sizes)


def label_bottomup(parent_index, depth, scaled_hate, scores,
                   double w_context, double w_reaction, double w_influence):
    cdef cnp.ndarray[cnp.int32_t, ndim=1] parent = np.ascontiguousarray(parent_index, dtype=np.int32)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] h = np.ascontiguousarray(scaled_hate, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] s = np.ascontiguousarray(scores, dtype=np.float64)
    cdef int n = parent.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] labels = np.empty(n, dtype=np.float64)
    cdef int i, p, k
    for i in range(n):
        p = parent[i]
        labels[i] = w_reaction * h[i] * s[i]
        if p >= 0:
            labels[i] += w_context * h[p] * s[p]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] order = np.argsort(np.asarray(depth), kind="stable")[::-1].astype(np.int64)
    for k in range(n):
        i = <int>order[k]
        p = parent[i]
        if p >= 0:
            labels[p] += w_influence * labels[i]
    return np.asarray(labels)
