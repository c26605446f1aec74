"""Rooted discussion trees: the data model shared by every pipeline stage.

A tree is one submission (the root) plus the comments that reply to it,
directly or transitively.  Nodes are stored in a flat list with an explicit
parent-index array; the canonical on-disk form is line-delimited JSON, one
tree per line: ``{"community": ..., "nodes": [{"id", "parent", "text",
"score", "hate_raw"?, "L"?, "class"?}, ...]}``.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass


class TreeError(ValueError):
    pass


@dataclass
class CommentNode:
    id: str
    parent_id: str | None
    text: str
    score: int
    community: str
    depth: int = 0
    hate_raw: float | None = None
    label: float | None = None
    label_class: int | None = None


@dataclass
class DiscussionTree:
    nodes: list[CommentNode]
    root_index: int
    parent_index: list[int]  # -1 for the root
    children: list[list[int]]
    community: str

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def root(self) -> CommentNode:
        return self.nodes[self.root_index]

    def depths(self) -> list[int]:
        return [n.depth for n in self.nodes]


def make_tree(nodes: list[CommentNode], community: str) -> DiscussionTree:
    """Assemble a tree from nodes whose parent_id links are already consistent.

    Nodes are re-ordered breadth-first from the root, so parents always precede
    children in the stored list.  Raises TreeError when the links do not form a
    single rooted tree.
    """
    if not nodes:
        raise TreeError("a tree needs at least one node")
    by_id: dict[str, int] = {}
    for i, n in enumerate(nodes):
        if n.id in by_id:
            raise TreeError(f"duplicate node id {n.id!r}")
        by_id[n.id] = i
    roots = [i for i, n in enumerate(nodes) if n.parent_id is None]
    if len(roots) != 1:
        raise TreeError(f"expected exactly one root, found {len(roots)}")

    kids: list[list[int]] = [[] for _ in nodes]
    for i, n in enumerate(nodes):
        if n.parent_id is None:
            continue
        p = by_id.get(n.parent_id)
        if p is None:
            raise TreeError(f"node {n.id!r} has unresolvable parent {n.parent_id!r}")
        kids[p].append(i)

    # BFS re-order; also catches cycles / disconnected comments.
    order: list[int] = []
    queue = deque([roots[0]])
    seen = {roots[0]}
    while queue:
        i = queue.popleft()
        order.append(i)
        for c in kids[i]:
            if c in seen:
                raise TreeError(f"cycle through node {nodes[c].id!r}")
            seen.add(c)
            queue.append(c)
    if len(order) != len(nodes):
        missing = [nodes[i].id for i in range(len(nodes)) if i not in seen]
        raise TreeError(f"nodes not reachable from root: {missing[:5]}")

    remap = {old: new for new, old in enumerate(order)}
    new_nodes = [nodes[i] for i in order]
    parent_index = []
    for n in new_nodes:
        parent_index.append(-1 if n.parent_id is None else remap[by_id[n.parent_id]])
    children: list[list[int]] = [[] for _ in new_nodes]
    for i, p in enumerate(parent_index):
        if p >= 0:
            children[p].append(i)
    for i, n in enumerate(new_nodes):
        n.depth = 0 if parent_index[i] < 0 else new_nodes[parent_index[i]].depth + 1
        n.community = community
    return DiscussionTree(new_nodes, 0, parent_index, children, community)


def validate(tree: DiscussionTree) -> list[str]:
    """Check every structural invariant; returns all violations found ([] = ok)."""
    violations: list[str] = []
    n = len(tree.nodes)
    if n < 1:
        return ["tree has no nodes"]
    if not (0 <= tree.root_index < n):
        return [f"root_index {tree.root_index} out of range"]

    roots = [i for i in range(n) if tree.parent_index[i] == -1]
    if roots != [tree.root_index]:
        violations.append(f"expected single root at {tree.root_index}, parent_index roots are {roots}")
    if tree.nodes[tree.root_index].parent_id is not None:
        violations.append("root node carries a parent_id")

    by_id = {node.id: i for i, node in enumerate(tree.nodes)}
    for i, node in enumerate(tree.nodes):
        p = tree.parent_index[i]
        if i == tree.root_index:
            continue
        if not (0 <= p < n):
            violations.append(f"node {node.id}: parent index {p} out of range")
            continue
        if node.parent_id is None or by_id.get(node.parent_id) != p:
            violations.append(f"node {node.id}: parent_id {node.parent_id!r} does not match parent index {p}")

    expect_children = [[] for _ in range(n)]
    for i, p in enumerate(tree.parent_index):
        if 0 <= p < n:
            expect_children[p].append(i)
    for i in range(n):
        if sorted(tree.children[i]) != sorted(expect_children[i]):
            violations.append(f"children list of node {tree.nodes[i].id} inconsistent with parent links")

    # Connectivity / acyclicity: walk parents from every node.
    for i in range(n):
        seen = set()
        j = i
        while j != tree.root_index:
            if j in seen or not (0 <= j < n):
                violations.append(f"cycle or broken chain at node {tree.nodes[i].id}")
                break
            seen.add(j)
            j = tree.parent_index[j]

    # Depths must match BFS distance from the root.
    for i, node in enumerate(tree.nodes):
        p = tree.parent_index[i]
        want = 0 if p == -1 else tree.nodes[p].depth + 1
        if node.depth != want:
            violations.append(f"node {node.id}: depth {node.depth}, expected {want}")
    return violations


def tree_to_dict(tree: DiscussionTree) -> dict:
    nodes = []
    for node in tree.nodes:
        d: dict = {
            "id": node.id,
            "parent": node.parent_id,
            "text": node.text,
            "score": node.score,
        }
        if node.hate_raw is not None:
            d["hate_raw"] = node.hate_raw
        if node.label is not None:
            d["L"] = node.label
            d["class"] = node.label_class
        nodes.append(d)
    return {"community": tree.community, "nodes": nodes}


def tree_from_dict(obj: dict) -> DiscussionTree:
    community = obj["community"]
    nodes = []
    for d in obj["nodes"]:
        node = CommentNode(
            id=d["id"],
            parent_id=d.get("parent"),
            text=d.get("text", ""),
            score=int(d["score"]),
            community=community,
            hate_raw=d.get("hate_raw"),
            label=d.get("L"),
            label_class=d.get("class"),
        )
        nodes.append(node)
    return make_tree(nodes, community)


def write_trees(path, trees: list[DiscussionTree]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for tree in trees:
            fh.write(json.dumps(tree_to_dict(tree), separators=(",", ":")))
            fh.write("\n")


def read_trees(path) -> list[DiscussionTree]:
    trees = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                trees.append(tree_from_dict(json.loads(line)))
    return trees
