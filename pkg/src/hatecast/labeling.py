"""Recursive hate labels for every node of a discussion tree.

Each node's continuous label sums three terms: the provocation of its parent
(context), its own instigation (reaction), and the discounted hatefulness of
the discussion that followed (influence, carried bottom-up through child
labels).  Hate probabilities are first mapped affinely onto [-0.7, 1.5] so
that disapproved hate and approved benign content separate by sign once
multiplied by the vote score.  Continuous labels are then bucketed into five
ordinal classes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .trees import DiscussionTree

SCALE_LOW = -0.7
SCALE_HIGH = 1.5

# Right-closed class boundaries: <0, [0,5], (5,20], (20,500], >500.
CLASS_EDGES = (0.0, 5.0, 20.0, 500.0)
NUM_CLASSES = 5


class LabelingError(ValueError):
    pass


@dataclass(frozen=True)
class LabelWeights:
    w_context: float = 0.25
    w_reaction: float = 0.25
    w_influence: float = 0.25

    def __post_init__(self):
        for name in ("w_context", "w_reaction", "w_influence"):
            if getattr(self, name) < 0:
                raise LabelingError(f"{name} must be >= 0")


# Sensitivity variants: one term doubled to 0.5, the others kept at 0.25.
WEIGHT_PRESETS: dict[str, LabelWeights] = {
    "equal": LabelWeights(),
    "influence": LabelWeights(w_influence=0.5),
    "reaction": LabelWeights(w_reaction=0.5),
    "context": LabelWeights(w_context=0.5),
}


@dataclass(frozen=True)
class HateLabel:
    continuous: float
    cls: int


def scale_hate(hate_raw: float) -> float:
    """Affine map of a probability in [0, 1] onto [SCALE_LOW, SCALE_HIGH]."""
    if math.isnan(hate_raw) or not 0.0 <= hate_raw <= 1.0:
        raise LabelingError(f"hate_raw {hate_raw!r} outside [0, 1]")
    return SCALE_LOW + (SCALE_HIGH - SCALE_LOW) * hate_raw


def bucketize(value: float) -> int:
    if math.isnan(value):
        raise LabelingError("cannot bucketize NaN label")
    if value < CLASS_EDGES[0]:
        return 0
    for cls, edge in enumerate(CLASS_EDGES[1:], start=1):
        if value <= edge:
            return cls
    return 4


def label_values(
    parent_index: np.ndarray,
    depth: np.ndarray,
    scaled_hate: np.ndarray,
    scores: np.ndarray,
    weights: LabelWeights,
) -> np.ndarray:
    """Continuous labels from already-scaled hate values (array form)."""
    return kernels.label_bottomup(
        np.asarray(parent_index, dtype=np.int32),
        np.asarray(depth),
        np.asarray(scaled_hate, dtype=np.float64),
        np.asarray(scores, dtype=np.float64),
        weights.w_context,
        weights.w_reaction,
        weights.w_influence,
    )


def compute_labels(tree: DiscussionTree, weights: LabelWeights) -> list[HateLabel]:
    """One HateLabel per node, aligned with tree.nodes."""
    scaled = np.empty(len(tree), dtype=np.float64)
    scores = np.empty(len(tree), dtype=np.float64)
    for i, node in enumerate(tree.nodes):
        if node.hate_raw is None:
            raise LabelingError(f"node {node.id!r} has no hate_raw value")
        scaled[i] = scale_hate(node.hate_raw)
        scores[i] = node.score
    values = label_values(
        np.asarray(tree.parent_index), np.asarray(tree.depths()), scaled, scores, weights
    )
    return [HateLabel(float(v), bucketize(float(v))) for v in values]


@dataclass
class DistributionReport:
    """Per-community ordinal class histogram, plus a total row."""

    rows: dict[str, list[int]]

    def total(self) -> list[int]:
        out = [0] * NUM_CLASSES
        for counts in self.rows.values():
            for c in range(NUM_CLASSES):
                out[c] += counts[c]
        return out

    def to_tsv(self) -> str:
        lines = ["community\t0\t1\t2\t3\t4"]
        for community in sorted(self.rows):
            lines.append(community + "\t" + "\t".join(str(c) for c in self.rows[community]))
        lines.append("Total\t" + "\t".join(str(c) for c in self.total()))
        return "\n".join(lines) + "\n"


def label_dataset(
    trees: list[DiscussionTree], weights: LabelWeights
) -> tuple[list[DiscussionTree], DistributionReport]:
    """Label every tree in place and tally classes per community."""
    rows: dict[str, list[int]] = {}
    for tree in trees:
        labels = compute_labels(tree, weights)
        counts = rows.setdefault(tree.community, [0] * NUM_CLASSES)
        for node, lab in zip(tree.nodes, labels):
            node.label = lab.continuous
            node.label_class = lab.cls
            counts[lab.cls] += 1
    return trees, DistributionReport(rows)
