"""Model-ready structural encodings of trimmed, labeled trees.

An EncodedGraph bundles the node feature matrix (embedding + score column),
clamped in/out-degree vectors, the clamped all-pairs shortest-path matrix,
ordinal labels, and the train/val/test split mask.  Batches pad graphs to a
common node count; padded positions are excluded from attention and loss by
the models.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .features import assemble_input, fnv1a64
from .trees import DiscussionTree

DEFAULT_MAX_SPD = 16
DEFAULT_MAX_DEGREE = 64

SPLIT_TRAIN, SPLIT_VAL, SPLIT_TEST = 0, 1, 2
SPLIT_NAMES = {"train": SPLIT_TRAIN, "val": SPLIT_VAL, "test": SPLIT_TEST}


class EncodingError(ValueError):
    pass


@dataclass
class EncodedGraph:
    graph_id: str
    community: str
    node_ids: list[str]
    features: np.ndarray    # (N, d_text + 1) float32
    in_degree: np.ndarray   # (N,) int32, clamped
    out_degree: np.ndarray  # (N,) int32, clamped
    spd: np.ndarray         # (N, N) int32, clamped
    labels: np.ndarray      # (N,) int32, ordinal classes 0..4
    split: np.ndarray       # (N,) int8, -1 until assign_splits runs

    @property
    def num_nodes(self) -> int:
        return self.features.shape[0]


def compute_spd(tree: DiscussionTree) -> np.ndarray:
    """True (unclamped) hop distances over the undirected tree."""
    return kernels.tree_spd(np.asarray(tree.parent_index, dtype=np.int32))


def compute_degrees(tree: DiscussionTree) -> tuple[np.ndarray, np.ndarray]:
    """(in_degree, out_degree) with edges oriented parent -> child."""
    n = len(tree)
    out_deg = np.array([len(tree.children[i]) for i in range(n)], dtype=np.int32)
    in_deg = np.array([0 if tree.parent_index[i] < 0 else 1 for i in range(n)], dtype=np.int32)
    return in_deg, out_deg


def encode_tree(
    tree: DiscussionTree,
    provider,
    max_spd: int = DEFAULT_MAX_SPD,
    max_degree: int = DEFAULT_MAX_DEGREE,
) -> EncodedGraph:
    """Encode one labeled tree; the provider supplies per-node embeddings."""
    n = len(tree)
    feats = np.empty((n, provider.d_text + 1), dtype=np.float32)
    labels = np.empty(n, dtype=np.int32)
    for i, node in enumerate(tree.nodes):
        if node.label_class is None:
            raise EncodingError(f"node {node.id!r} has no label; run labeling first")
        feats[i] = assemble_input(provider.features_for(node.id, node.text), node.score)
        labels[i] = node.label_class
    in_deg, out_deg = compute_degrees(tree)
    spd = compute_spd(tree)
    return EncodedGraph(
        graph_id=tree.root.id,
        community=tree.community,
        node_ids=[node.id for node in tree.nodes],
        features=feats,
        in_degree=np.minimum(in_deg, max_degree),
        out_degree=np.minimum(out_deg, max_degree),
        spd=np.minimum(spd, max_spd).astype(np.int32),
        labels=labels,
        split=np.full(n, -1, dtype=np.int8),
    )


def _split_uniform(graph_id: str, node_id: str, seed: int) -> float:
    key = f"{graph_id}\x1f{node_id}\x1f{seed}".encode("utf-8")
    return fnv1a64(key) / 2.0**64


def assign_splits(
    graphs: list[EncodedGraph],
    fractions: tuple[float, float, float] = (0.7, 0.1, 0.2),
    seed: int = 0,
) -> list[EncodedGraph]:
    """Per-node split assignment, a pure function of (graph id, node id, seed)."""
    f_train, f_val, f_test = fractions
    if min(fractions) < 0 or abs(f_train + f_val + f_test - 1.0) > 1e-9:
        raise EncodingError(f"split fractions {fractions} must be >= 0 and sum to 1")
    for g in graphs:
        for i, node_id in enumerate(g.node_ids):
            u = _split_uniform(g.graph_id, node_id, seed)
            if u < f_train:
                g.split[i] = SPLIT_TRAIN
            elif u < f_train + f_val:
                g.split[i] = SPLIT_VAL
            else:
                g.split[i] = SPLIT_TEST
    return graphs


@dataclass
class Batch:
    features: np.ndarray    # (B, N, d) float32
    in_degree: np.ndarray   # (B, N) int32
    out_degree: np.ndarray  # (B, N) int32
    spd: np.ndarray         # (B, N, N) int32
    labels: np.ndarray      # (B, N) float32 regression targets
    split: np.ndarray       # (B, N) int8, -1 on padding
    mask: np.ndarray        # (B, N) bool, True on real nodes
    graph_ids: list[str] = field(default_factory=list)

    @property
    def size(self) -> int:
        return self.features.shape[0]


def pad_graphs(graphs: list[EncodedGraph]) -> Batch:
    b = len(graphs)
    n_max = max(g.num_nodes for g in graphs)
    d = graphs[0].features.shape[1]
    batch = Batch(
        features=np.zeros((b, n_max, d), dtype=np.float32),
        in_degree=np.zeros((b, n_max), dtype=np.int32),
        out_degree=np.zeros((b, n_max), dtype=np.int32),
        spd=np.zeros((b, n_max, n_max), dtype=np.int32),
        labels=np.zeros((b, n_max), dtype=np.float32),
        split=np.full((b, n_max), -1, dtype=np.int8),
        mask=np.zeros((b, n_max), dtype=bool),
        graph_ids=[g.graph_id for g in graphs],
    )
    for k, g in enumerate(graphs):
        n = g.num_nodes
        if g.features.shape[1] != d:
            raise EncodingError("all graphs in a batch must share feature width")
        batch.features[k, :n] = g.features
        batch.in_degree[k, :n] = g.in_degree
        batch.out_degree[k, :n] = g.out_degree
        batch.spd[k, :n, :n] = g.spd
        batch.labels[k, :n] = g.labels
        batch.split[k, :n] = g.split
        batch.mask[k, :n] = True
    return batch


def make_batches(
    graphs: list[EncodedGraph],
    batch_size: int,
    seed: int = 0,
    shuffle: bool = True,
) -> list[Batch]:
    order = np.arange(len(graphs))
    if shuffle:
        order = np.random.default_rng(seed).permutation(len(graphs))
    out = []
    for start in range(0, len(graphs), batch_size):
        chunk = [graphs[i] for i in order[start : start + batch_size]]
        out.append(pad_graphs(chunk))
    return out
