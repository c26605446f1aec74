"""Horizontal trimming: restrict labeled trees to the model's input view.

The root is always kept; a comment survives only if it sits within the depth
cut, precedes a sub-discussion of at least ``min_descendants`` comments in the
FULL tree, and its parent survived too.  Labels are carried over untouched, so
the labels of trimmed leaves still encode the hidden future discussion below
them.  Trees left with fewer than ``min_nodes_after`` nodes are dropped.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .trees import CommentNode, DiscussionTree, make_tree


@dataclass(frozen=True)
class TrimConfig:
    max_depth: int = 4
    min_descendants: int = 2
    min_nodes_after: int = 2

    def __post_init__(self):
        if self.max_depth < 0 or self.min_descendants < 0:
            raise ValueError("max_depth and min_descendants must be >= 0")


def count_descendants(tree: DiscussionTree, node_index: int) -> int:
    """Strict descendants of one node in the full tree."""
    sizes = kernels.subtree_sizes(
        np.asarray(tree.parent_index, dtype=np.int32), np.asarray(tree.depths())
    )
    return int(sizes[node_index]) - 1


def trim_tree(tree: DiscussionTree, cfg: TrimConfig) -> DiscussionTree | None:
    """Trimmed copy of the tree, or None when it falls below the size floor."""
    sizes = kernels.subtree_sizes(
        np.asarray(tree.parent_index, dtype=np.int32), np.asarray(tree.depths())
    )
    keep = [False] * len(tree)
    keep[tree.root_index] = True
    # nodes are stored parents-first, so keep[] of the parent is final by the
    # time each child is visited
    for i, node in enumerate(tree.nodes):
        if i == tree.root_index:
            continue
        parent_kept = keep[tree.parent_index[i]]
        keep[i] = (
            parent_kept
            and node.depth <= cfg.max_depth
            and int(sizes[i]) - 1 >= cfg.min_descendants
        )
    kept = sum(keep)
    if kept < cfg.min_nodes_after:
        return None
    nodes = []
    for i, node in enumerate(tree.nodes):
        if keep[i]:
            nodes.append(
                CommentNode(
                    id=node.id,
                    parent_id=node.parent_id,
                    text=node.text,
                    score=node.score,
                    community=node.community,
                    hate_raw=node.hate_raw,
                    label=node.label,
                    label_class=node.label_class,
                )
            )
    return make_tree(nodes, tree.community)


@dataclass
class TrimReport:
    trees_in: int = 0
    trees_kept: int = 0
    trees_dropped: int = 0
    nodes_before: dict[str, int] = field(default_factory=dict)
    nodes_after: dict[str, int] = field(default_factory=dict)

    def to_tsv(self) -> str:
        lines = ["community\tnodes\tnodes_after_filtering"]
        for community in sorted(self.nodes_before):
            lines.append(
                f"{community}\t{self.nodes_before[community]}\t{self.nodes_after.get(community, 0)}"
            )
        return "\n".join(lines) + "\n"


def trim_dataset(
    trees: list[DiscussionTree], cfg: TrimConfig
) -> tuple[list[DiscussionTree], TrimReport]:
    report = TrimReport(trees_in=len(trees))
    out = []
    for tree in trees:
        report.nodes_before[tree.community] = report.nodes_before.get(tree.community, 0) + len(tree)
        trimmed = trim_tree(tree, cfg)
        if trimmed is None:
            report.trees_dropped += 1
            continue
        report.trees_kept += 1
        report.nodes_after[tree.community] = report.nodes_after.get(tree.community, 0) + len(trimmed)
        out.append(trimmed)
    return out, report
