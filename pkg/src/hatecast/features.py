"""Per-node feature vectors and raw hate probabilities.

Two interchangeable providers: a hashed bag-of-words stand-in that needs no
model weights, and a file-backed table of precomputed embeddings.  Both are
deterministic; the hashed provider uses FNV-1a 64-bit so bucket assignment is
identical on every platform.

Feature files are line-delimited JSON: ``{"id": ..., "embedding": [...],
"hate_raw": ...}``.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass

import numpy as np

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_TOKEN_RE = re.compile(r"[a-z0-9]+")


class FeatureError(ValueError):
    pass


def fnv1a64(data: bytes) -> int:
    h = _FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * _FNV_PRIME) & 0xFFFFFFFFFFFFFFFF
    return h


def tokenize(text: str) -> list[str]:
    """Lowercase and split on non-alphanumerics."""
    return _TOKEN_RE.findall(text.lower())


@dataclass
class NodeFeatures:
    embedding: np.ndarray
    hate_raw: float


def featurize_hashed(text: str, d_text: int, lexicon: frozenset[str]) -> NodeFeatures:
    """Hash tokens into d_text buckets; hate_raw is the lexicon-hit fraction."""
    if d_text < 1:
        raise FeatureError(f"d_text must be >= 1, got {d_text}")
    vec = np.zeros(d_text, dtype=np.float32)
    tokens = tokenize(text)
    if not tokens:
        return NodeFeatures(vec, 0.0)
    weight = 1.0 / math.sqrt(len(tokens))
    hits = 0
    for tok in tokens:
        vec[fnv1a64(tok.encode("utf-8")) % d_text] += weight
        if tok in lexicon:
            hits += 1
    return NodeFeatures(vec, hits / len(tokens))


class HashedProvider:
    """Deterministic bag-of-words featurizer (desk-scale embedding stand-in)."""

    mode = "hashed-lexicon"

    def __init__(self, d_text: int, lexicon: frozenset[str]):
        if d_text < 1:
            raise FeatureError(f"d_text must be >= 1, got {d_text}")
        self.d_text = d_text
        self.lexicon = lexicon

    def features_for(self, node_id: str, text: str) -> NodeFeatures:
        return featurize_hashed(text, self.d_text, self.lexicon)


class FileProvider:
    """Serves precomputed embeddings keyed by node id."""

    mode = "file-backed"

    def __init__(self, table: dict[str, NodeFeatures], d_text: int):
        self.table = table
        self.d_text = d_text

    def features_for(self, node_id: str, text: str) -> NodeFeatures:
        feats = self.table.get(node_id)
        if feats is None:
            raise FeatureError(f"no feature row for id {node_id!r}")
        if feats.embedding.shape[0] != self.d_text:
            raise FeatureError(
                f"id {node_id!r}: embedding length {feats.embedding.shape[0]} != d_text {self.d_text}"
            )
        return feats


def assemble_input(features: NodeFeatures, score: int) -> np.ndarray:
    """Append the vote score (raw) as the final input component."""
    return np.append(features.embedding.astype(np.float32), np.float32(score))


def load_feature_file(path, d_text: int | None = None) -> FileProvider:
    table: dict[str, NodeFeatures] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            vec = np.asarray(obj["embedding"], dtype=np.float32)
            hate = float(obj.get("hate_raw", 0.0))
            if not 0.0 <= hate <= 1.0:
                raise FeatureError(f"line {line_no}: hate_raw {hate} outside [0, 1]")
            if d_text is None:
                d_text = vec.shape[0]
            elif vec.shape[0] != d_text:
                raise FeatureError(
                    f"line {line_no}: embedding length {vec.shape[0]} != d_text {d_text}"
                )
            table[obj["id"]] = NodeFeatures(vec, hate)
    if d_text is None:
        raise FeatureError(f"feature file {path} is empty")
    return FileProvider(table, d_text)


def write_feature_file(path, rows: dict[str, NodeFeatures]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for node_id, feats in rows.items():
            obj = {
                "id": node_id,
                "embedding": [float(x) for x in feats.embedding],
                "hate_raw": float(feats.hate_raw),
            }
            fh.write(json.dumps(obj, separators=(",", ":")))
            fh.write("\n")


def load_lexicon(path) -> frozenset[str]:
    """One token per line; blank lines and '#' comments ignored."""
    tokens = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            tok = line.strip().lower()
            if tok and not tok.startswith("#"):
                tokens.add(tok)
    return frozenset(tokens)
