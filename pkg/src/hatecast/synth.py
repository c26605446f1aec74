"""Deterministic synthetic discussion corpora.

``generate`` samples branching-process trees with controllable hate
escalation, a community norm that rewards or punishes hateful content through
vote scores, and text drawn from neutral/flagged token pools so the hashed
featurizer carries the planted signal.

``generate_longrange_fixture`` plants a dependency that only a full-context
model can exploit: the hidden sub-discussion behind each deep leaf is hot or
cold according to a marker token in the ROOT text, four hops away, with pure
noise in between.
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass

import numpy as np

from .features import load_lexicon
from .trees import CommentNode, DiscussionTree, make_tree

NEUTRAL_TOKENS = (
    "river mountain coffee garden music bicycle window harvest lantern meadow "
    "orchard pebble thunder cinema pretzel harbor blanket compass jigsaw marble "
    "saddle teapot walnut anchor cabin canvas dewdrop sapling fiddle gondola"
).split()

# hot/cold root markers for the long-range fixture; deliberately outside both pools
HOT_MARKER = "ember"
COLD_MARKER = "frost"


def demo_lexicon() -> frozenset[str]:
    path = importlib.resources.files("hatecast").joinpath("data/demo_lexicon.txt")
    with importlib.resources.as_file(path) as p:
        return load_lexicon(p)


LEXICON_TOKENS = tuple(sorted(demo_lexicon()))


@dataclass(frozen=True)
class SynthConfig:
    seed: int = 0
    num_trees: int = 100
    branching: float = 2.0        # mean children per eligible node
    max_children: int = 6         # truncation of the child draw
    max_depth: int = 6
    escalation: float = 0.5       # P(child hateful | parent hateful)
    base_hate: float = 0.1        # P(hateful | parent benign); also the root
    community_norm: float = 1.0   # in [-1, 1]: >0 rewards hate, <0 punishes it
    score_scale: float = 10.0
    score_baseline: float = 1.0
    score_sigma: float = 2.0
    score_clip: int = 500
    max_nodes: int = 200
    tokens_per_text: int = 8
    community: str = "synth"

    def __post_init__(self):
        if not 0.0 <= self.escalation <= 1.0 or not 0.0 <= self.base_hate <= 1.0:
            raise ValueError("escalation and base_hate must be in [0, 1]")
        if not -1.0 <= self.community_norm <= 1.0:
            raise ValueError("community_norm must be in [-1, 1]")
        if self.max_depth < 1 or self.num_trees < 0 or self.max_nodes < 1:
            raise ValueError("max_depth, num_trees and max_nodes must be positive")


def _tree_rng(cfg: SynthConfig, tree_index: int, salt: int = 0) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([cfg.seed, salt, tree_index]))


def _draw_score(rng: np.random.Generator, cfg: SynthConfig, hate_raw: float) -> int:
    mu = cfg.community_norm * (2.0 * hate_raw - 1.0) * cfg.score_scale + cfg.score_baseline
    score = int(round(rng.normal(mu, cfg.score_sigma)))
    return max(-cfg.score_clip, min(cfg.score_clip, score))


def _draw_text(rng: np.random.Generator, hate_raw: float, n_tokens: int) -> str:
    tokens = []
    for _ in range(n_tokens):
        pool = LEXICON_TOKENS if rng.random() < hate_raw else NEUTRAL_TOKENS
        tokens.append(pool[rng.integers(len(pool))])
    return " ".join(tokens)


def generate(cfg: SynthConfig) -> list[DiscussionTree]:
    """Branching-process corpus; same seed always yields the identical corpus."""
    trees = []
    for ti in range(cfg.num_trees):
        rng = _tree_rng(cfg, ti)
        nodes: list[CommentNode] = []
        hateful_flags: list[bool] = []

        def add_node(parent: int | None, hateful: bool) -> int:
            hate_raw = float(rng.uniform(0.75, 1.0) if hateful else rng.uniform(0.0, 0.25))
            idx = len(nodes)
            nodes.append(
                CommentNode(
                    id=f"{cfg.community}-{ti}" if parent is None else f"{cfg.community}-{ti}-c{idx}",
                    parent_id=None if parent is None else nodes[parent].id,
                    text=_draw_text(rng, hate_raw, cfg.tokens_per_text),
                    score=_draw_score(rng, cfg, hate_raw),
                    community=cfg.community,
                    hate_raw=hate_raw,
                )
            )
            hateful_flags.append(hateful)
            return idx

        root = add_node(None, bool(rng.random() < cfg.base_hate))
        frontier = [(root, 0)]
        while frontier:
            parent, depth = frontier.pop(0)
            if depth >= cfg.max_depth:
                continue
            n_children = int(min(rng.poisson(cfg.branching), cfg.max_children))
            n_children = min(n_children, cfg.max_nodes - len(nodes))
            for _ in range(n_children):
                p_hate = cfg.escalation if hateful_flags[parent] else cfg.base_hate
                child = add_node(parent, bool(rng.random() < p_hate))
                frontier.append((child, depth + 1))
        trees.append(make_tree(nodes, cfg.community))
    return trees


def generate_longrange_fixture(cfg: SynthConfig) -> list[DiscussionTree]:
    """Trees whose deep-leaf labels are decided by the root marker token.

    Construction per tree: a root -> d1 -> d2 -> d3 -> d4 chain, four hidden
    depth-5 replies under d4 whose hatefulness follows the root's hot/cold
    bit, and a small bit-independent distractor branch.  Every observed node
    except the root carries only noise, so nothing within two hops of d4
    correlates with the bit; the interval arithmetic of the label recursion
    pins hot leaves to class 2 and cold leaves to class 0 exactly.
    """
    if cfg.max_depth < 5:
        raise ValueError("long-range fixture needs max_depth >= 5")
    trees = []
    for ti in range(cfg.num_trees):
        rng = _tree_rng(cfg, ti, salt=1)
        hot = bool(rng.random() < 0.5)
        nodes: list[CommentNode] = []

        def noise_text() -> str:
            return " ".join(
                NEUTRAL_TOKENS[rng.integers(len(NEUTRAL_TOKENS))] for _ in range(4)
            )

        def add(parent: int | None, hate_raw: float, score: int, text: str) -> int:
            idx = len(nodes)
            nodes.append(
                CommentNode(
                    id=f"{cfg.community}-{ti}" if parent is None else f"{cfg.community}-{ti}-c{idx}",
                    parent_id=None if parent is None else nodes[parent].id,
                    text=text,
                    score=score,
                    community=cfg.community,
                    hate_raw=hate_raw,
                )
            )
            return idx

        def noise_hate() -> float:
            return float(rng.uniform(0.1, 0.3))

        def noise_score() -> int:
            return int(rng.integers(-4, 5))

        marker = HOT_MARKER if hot else COLD_MARKER
        root = add(None, noise_hate(), noise_score(), marker + " " + noise_text())
        node = root
        for _ in range(4):  # the observed chain d1..d4
            node = add(node, noise_hate(), noise_score(), noise_text())
        leaf = node
        for _ in range(4):  # hidden depth-5 replies carrying the planted signal
            hate_raw = float(rng.uniform(0.9, 1.0) if hot else rng.uniform(0.0, 0.1))
            add(leaf, hate_raw, int(rng.integers(35, 46)), _draw_text(rng, hate_raw, 4))
        distractor = add(root, noise_hate(), noise_score(), noise_text())
        for _ in range(2):
            add(distractor, noise_hate(), noise_score(), noise_text())
        trees.append(make_tree(nodes, cfg.community))
    return trees


FIXTURES = {"standard": generate, "longrange": generate_longrange_fixture}
