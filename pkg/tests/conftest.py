"""Shared fixtures and independent reference oracles.

The oracles here are deliberately naive (direct recursion, brute-force
filters, Floyd-Warshall, finite differences) and stay independent of the
library code paths they check.
"""

from __future__ import annotations

import numpy as np
import pytest

from hatecast.labeling import SCALE_HIGH, SCALE_LOW, LabelWeights
from hatecast.trees import CommentNode, DiscussionTree, make_tree


def random_tree(
    rng: np.random.Generator, max_nodes: int = 50, community: str = "rand", prefix: str = "n"
) -> DiscussionTree:
    """Uniform random recursive tree with random hate/score payloads."""
    n = int(rng.integers(1, max_nodes + 1))
    nodes = []
    for i in range(n):
        parent = None if i == 0 else f"{prefix}{int(rng.integers(0, i))}"
        nodes.append(
            CommentNode(
                id=f"{prefix}{i}",
                parent_id=parent,
                text=f"comment {i}",
                score=int(rng.integers(-20, 50)),
                community=community,
                hate_raw=float(rng.random()),
            )
        )
    return make_tree(nodes, community)


def chain_tree(payload: list[tuple[float, int]], community: str = "chain") -> DiscussionTree:
    """Root-to-leaf chain with (hate_raw, score) per node."""
    nodes = []
    for i, (hate_raw, score) in enumerate(payload):
        nodes.append(
            CommentNode(
                id=f"n{i}",
                parent_id=None if i == 0 else f"n{i - 1}",
                text="",
                score=score,
                community=community,
                hate_raw=hate_raw,
            )
        )
    return make_tree(nodes, community)


def oracle_scale(hate_raw: float) -> float:
    return SCALE_LOW + (SCALE_HIGH - SCALE_LOW) * hate_raw


def oracle_labels(tree: DiscussionTree, weights: LabelWeights) -> list[float]:
    """Direct recursive evaluation of the three-term label definition."""

    def scaled(i: int) -> float:
        return oracle_scale(tree.nodes[i].hate_raw)

    def label(v: int) -> float:
        p = tree.parent_index[v]
        c_term = 0.0 if p < 0 else weights.w_context * scaled(p) * tree.nodes[p].score
        r_term = weights.w_reaction * scaled(v) * tree.nodes[v].score
        i_term = sum(weights.w_influence * label(c) for c in tree.children[v])
        return c_term + r_term + i_term

    return [label(v) for v in range(len(tree))]


def oracle_trim_keep(tree: DiscussionTree, max_depth: int, min_descendants: int) -> set[int]:
    """Brute-force keep set: per-node filter plus the root-containing component."""

    def descendants(v: int) -> int:
        return sum(1 + descendants(c) for c in tree.children[v])

    passes = {
        i
        for i, node in enumerate(tree.nodes)
        if i == tree.root_index
        or (node.depth <= max_depth and descendants(i) >= min_descendants)
    }
    keep: set[int] = set()
    frontier = [tree.root_index]
    while frontier:
        v = frontier.pop()
        keep.add(v)
        for c in tree.children[v]:
            if c in passes:
                frontier.append(c)
    return keep


def floyd_warshall(tree: DiscussionTree) -> np.ndarray:
    n = len(tree)
    big = 10**6
    dist = np.full((n, n), big, dtype=np.int64)
    np.fill_diagonal(dist, 0)
    for i, p in enumerate(tree.parent_index):
        if p >= 0:
            dist[i, p] = dist[p, i] = 1
    for k in range(n):
        dist = np.minimum(dist, dist[:, k : k + 1] + dist[k : k + 1, :])
    return dist


def finite_diff_grad(f, x: np.ndarray, h: float = 1e-4) -> np.ndarray:
    """Central finite differences of a scalar function of one array."""
    grad = np.zeros_like(x, dtype=np.float64)
    flat = x.reshape(-1)
    gflat = grad.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + h
        hi = f()
        flat[i] = orig - h
        lo = f()
        flat[i] = orig
        gflat[i] = (hi - lo) / (2 * h)
    return grad


def rel_err(a: np.ndarray, b: np.ndarray, floor: float = 1e-2) -> float:
    """Max elementwise relative error, with a floor so near-zero entries are
    judged absolutely (finite differences carry ~1e-8 noise at h=1e-4)."""
    denom = np.maximum(np.maximum(np.abs(a), np.abs(b)), floor)
    return float(np.max(np.abs(a - b) / denom))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)
