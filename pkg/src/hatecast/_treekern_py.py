"""Pure-numpy fallback for the tree kernels.

Same contracts as the compiled module in ``_treekern.pyx``; used whenever the
extension is unavailable or ``HATECAST_PURE_PY=1`` is set.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def tree_spd(parent_index: np.ndarray) -> np.ndarray:
    """All-pairs shortest-path distances over the undirected tree.

    parent_index: int32 array, -1 at the root.  Returns an int32 (N, N) matrix
    of true (unclamped) hop counts.
    """
    parent = np.asarray(parent_index, dtype=np.int32)
    n = parent.shape[0]
    adj: list[list[int]] = [[] for _ in range(n)]
    for i in range(n):
        p = parent[i]
        if p >= 0:
            adj[i].append(int(p))
            adj[p].append(i)
    dist = np.full((n, n), -1, dtype=np.int32)
    for src in range(n):
        row = dist[src]
        row[src] = 0
        frontier = [src]
        d = 0
        while frontier:
            d += 1
            nxt = []
            for u in frontier:
                for v in adj[u]:
                    if row[v] < 0:
                        row[v] = d
                        nxt.append(v)
            frontier = nxt
    return dist


def subtree_sizes(parent_index: np.ndarray, depth: np.ndarray) -> np.ndarray:
    """Node count of each node's subtree (the node itself included)."""
    parent = np.asarray(parent_index, dtype=np.int32)
    order = np.argsort(np.asarray(depth), kind="stable")[::-1]
    sizes = np.ones(parent.shape[0], dtype=np.int64)
    for i in order:
        p = parent[i]
        if p >= 0:
            sizes[p] += sizes[i]
    return sizes


def label_bottomup(
    parent_index: np.ndarray,
    depth: np.ndarray,
    scaled_hate: np.ndarray,
    scores: np.ndarray,
    w_context: float,
    w_reaction: float,
    w_influence: float,
) -> np.ndarray:
    """Bottom-up hate-label recursion.

    L(v) = w_context*h(p)*s(p) [0 at root] + w_reaction*h(v)*s(v)
         + w_influence * sum over children c of L(c),
    evaluated leaves-first.  h is the scaled hate value, s the vote score.
    """
    parent = np.asarray(parent_index, dtype=np.int32)
    h = np.asarray(scaled_hate, dtype=np.float64)
    s = np.asarray(scores, dtype=np.float64)
    own = w_reaction * h * s
    ctx = np.where(parent >= 0, w_context * h[parent] * s[parent], 0.0)
    labels = own + ctx
    order = np.argsort(np.asarray(depth), kind="stable")[::-1]
    for i in order:
        p = parent[i]
        if p >= 0:
            labels[p] += w_influence * labels[i]
    return labels
