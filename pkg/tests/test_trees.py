import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_tree
from hatecast.trees import (
    CommentNode,
    TreeError,
    make_tree,
    read_trees,
    tree_from_dict,
    tree_to_dict,
    validate,
    write_trees,
)


def _node(nid, parent, score=1):
    return CommentNode(id=nid, parent_id=parent, text=f"t {nid}", score=score, community="c")


def test_three_node_tree_depths():
    tree = make_tree([_node("s", None), _node("a", "s"), _node("b", "a")], "c")
    assert [n.depth for n in tree.nodes] == [0, 1, 2]
    assert validate(tree) == []


def test_two_children_share_parent():
    tree = make_tree([_node("s", None), _node("a", "s"), _node("b", "s")], "c")
    assert len(tree.children[tree.root_index]) == 2


def test_missing_parent_rejected():
    with pytest.raises(TreeError, match="unresolvable parent"):
        make_tree([_node("s", None), _node("a", "zz")], "c")


def test_duplicate_id_rejected():
    with pytest.raises(TreeError, match="duplicate"):
        make_tree([_node("s", None), _node("a", "s"), _node("a", "s")], "c")


def test_self_parent_is_cycle():
    with pytest.raises(TreeError):
        make_tree([_node("s", None), _node("a", "a")], "c")


def test_validate_flags_self_parent_index():
    tree = make_tree([_node("s", None), _node("a", "s")], "c")
    tree.parent_index[1] = 1  # corrupt: node is its own parent
    assert any("cycle" in v or "parent" in v for v in validate(tree))


def test_validate_flags_corrupt_depth(rng):
    tree = random_tree(rng, max_nodes=30)
    victim = int(rng.integers(0, len(tree)))
    tree.nodes[victim].depth += 1
    assert any("depth" in v for v in validate(tree))


def test_depth_equals_bfs_distance(rng):
    for _ in range(20):
        tree = random_tree(rng, max_nodes=60)
        # independent BFS from the root
        dist = {tree.root_index: 0}
        frontier = [tree.root_index]
        while frontier:
            v = frontier.pop()
            for c in tree.children[v]:
                dist[c] = dist[v] + 1
                frontier.append(c)
        assert [tree.nodes[i].depth for i in range(len(tree))] == [dist[i] for i in range(len(tree))]


@settings(max_examples=50, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_random_trees_validate(seed):
    tree = random_tree(np.random.default_rng(seed), max_nodes=40)
    assert validate(tree) == []


def test_json_roundtrip(tmp_path, rng):
    trees = [random_tree(rng, max_nodes=20) for _ in range(5)]
    trees[0].nodes[0].label = 1.25
    trees[0].nodes[0].label_class = 1
    path = tmp_path / "trees.jsonl"
    write_trees(path, trees)
    back = read_trees(path)
    assert len(back) == len(trees)
    for a, b in zip(trees, back):
        assert [n.id for n in a.nodes] == [n.id for n in b.nodes]
        assert a.parent_index == b.parent_index
        assert [n.score for n in a.nodes] == [n.score for n in b.nodes]
    assert back[0].nodes[0].label == 1.25
    assert back[0].nodes[0].label_class == 1


def test_dict_roundtrip_preserves_hate_raw(rng):
    tree = random_tree(rng, max_nodes=10)
    back = tree_from_dict(json.loads(json.dumps(tree_to_dict(tree))))
    assert [n.hate_raw for n in back.nodes] == [n.hate_raw for n in tree.nodes]
