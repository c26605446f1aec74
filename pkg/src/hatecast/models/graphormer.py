"""Full-context graph transformer with degree and shortest-path encodings.

Initial node states add learnable in/out-degree embeddings to the projected
features; every attention layer biases its logits with a learnable per-head
scalar indexed by the clamped shortest-path distance between the two nodes,
so attention spans all node pairs while staying structure-aware.  The output
head regresses one scalar per node.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .. import tensor as T
from ..encoding import Batch
from ..tensor import Tensor

_NEG_MASK = -1e30  # additive logit mask; exp() underflows to exactly 0


@dataclass(frozen=True)
class ModelConfig:
    num_layers: int
    hidden_dim: int
    num_heads: int
    ffn_dim: int
    max_spd: int = 16
    max_degree: int = 64
    dropout: float = 0.1

    def __post_init__(self):
        if self.hidden_dim % self.num_heads != 0:
            raise ValueError(
                f"hidden_dim {self.hidden_dim} not divisible by num_heads {self.num_heads}"
            )

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        return cls(**d)


def desk_preset(**overrides) -> ModelConfig:
    """Small CPU-friendly configuration used by tests and experiments."""
    cfg = dict(num_layers=4, hidden_dim=64, num_heads=4, ffn_dim=256, dropout=0.1)
    cfg.update(overrides)
    return ModelConfig(**cfg)


def base_preset(**overrides) -> ModelConfig:
    """Ten layers at width 769.  769 is prime, so heads cannot split it; the
    faithful choice is single-head attention at full width."""
    cfg = dict(num_layers=10, hidden_dim=769, num_heads=1, ffn_dim=3076, dropout=0.1)
    cfg.update(overrides)
    return ModelConfig(**cfg)


PRESETS = {"desk": desk_preset, "base": base_preset}


def init_graphormer(cfg: ModelConfig, d_in: int, seed: int, dtype=np.float32) -> dict[str, Tensor]:
    """Fresh parameter set: scaled-normal projections, zeroed bias tables."""
    rng = np.random.default_rng(seed)
    h, heads = cfg.hidden_dim, cfg.num_heads

    def normal(*shape):
        return T.parameter(rng.normal(0.0, 0.02, size=shape), dtype)

    def zeros(*shape):
        return T.parameter(np.zeros(shape), dtype)

    def ones(*shape):
        return T.parameter(np.ones(shape), dtype)

    p: dict[str, Tensor] = {
        "input_proj.weight": normal(d_in, h),
        "input_proj.bias": zeros(h),
        "degree_in.table": normal(cfg.max_degree + 1, h),
        "degree_out.table": normal(cfg.max_degree + 1, h),
        "spatial_bias.table": zeros(cfg.max_spd + 1, heads),
        "final_norm.gamma": ones(h),
        "final_norm.beta": zeros(h),
        "head.weight": normal(h, 1),
        "head.bias": zeros(1),
    }
    for i in range(cfg.num_layers):
        pre = f"layers.{i}"
        p[f"{pre}.attn_norm.gamma"] = ones(h)
        p[f"{pre}.attn_norm.beta"] = zeros(h)
        for name in ("q", "k", "v", "out"):
            p[f"{pre}.attn.{name}.weight"] = normal(h, h)
            p[f"{pre}.attn.{name}.bias"] = zeros(h)
        p[f"{pre}.ffn_norm.gamma"] = ones(h)
        p[f"{pre}.ffn_norm.beta"] = zeros(h)
        p[f"{pre}.ffn.w1"] = normal(h, cfg.ffn_dim)
        p[f"{pre}.ffn.b1"] = zeros(cfg.ffn_dim)
        p[f"{pre}.ffn.w2"] = normal(cfg.ffn_dim, h)
        p[f"{pre}.ffn.b2"] = zeros(h)
    return p


def embed_inputs(params: dict[str, Tensor], batch: Batch) -> Tensor:
    """H0 = projected features + in-degree embedding + out-degree embedding.

    Degree embeddings enter only here, never in later layers.
    """
    dtype = params["input_proj.weight"].dtype
    x = Tensor(batch.features.astype(dtype))
    h = x @ params["input_proj.weight"] + params["input_proj.bias"]
    h = h + T.embedding_lookup(params["degree_in.table"], batch.in_degree)
    h = h + T.embedding_lookup(params["degree_out.table"], batch.out_degree)
    return h


def attention_layer(
    params: dict[str, Tensor],
    layer: int,
    h: Tensor,
    spatial_bias: Tensor,
    key_mask: Tensor,
    cfg: ModelConfig,
    training: bool,
    rng: np.random.Generator | None,
) -> Tensor:
    """One pre-norm block: biased self-attention, then the feed-forward net."""
    pre = f"layers.{layer}"
    b, n, _ = h.shape
    heads = cfg.num_heads
    dh = cfg.hidden_dim // heads

    def split_heads(t: Tensor) -> Tensor:
        return T.transpose(T.reshape(t, (b, n, heads, dh)), (0, 2, 1, 3))

    hn = T.layer_norm(h, params[f"{pre}.attn_norm.gamma"], params[f"{pre}.attn_norm.beta"])
    q = split_heads(hn @ params[f"{pre}.attn.q.weight"] + params[f"{pre}.attn.q.bias"])
    k = split_heads(hn @ params[f"{pre}.attn.k.weight"] + params[f"{pre}.attn.k.bias"])
    v = split_heads(hn @ params[f"{pre}.attn.v.weight"] + params[f"{pre}.attn.v.bias"])

    logits = T.scale(q @ T.transpose(k, (0, 1, 3, 2)), 1.0 / math.sqrt(dh))
    logits = logits + spatial_bias + key_mask
    probs = T.softmax(logits)
    if training and cfg.dropout > 0:
        probs = T.dropout(probs, cfg.dropout, rng, training)
    attended = T.reshape(T.transpose(probs @ v, (0, 2, 1, 3)), (b, n, cfg.hidden_dim))
    attended = attended @ params[f"{pre}.attn.out.weight"] + params[f"{pre}.attn.out.bias"]
    if training and cfg.dropout > 0:
        attended = T.dropout(attended, cfg.dropout, rng, training)
    h = h + attended

    hn = T.layer_norm(h, params[f"{pre}.ffn_norm.gamma"], params[f"{pre}.ffn_norm.beta"])
    ff = T.gelu(hn @ params[f"{pre}.ffn.w1"] + params[f"{pre}.ffn.b1"])
    ff = ff @ params[f"{pre}.ffn.w2"] + params[f"{pre}.ffn.b2"]
    if training and cfg.dropout > 0:
        ff = T.dropout(ff, cfg.dropout, rng, training)
    return h + ff


def forward_graphormer(
    params: dict[str, Tensor],
    batch: Batch,
    cfg: ModelConfig,
    training: bool = False,
    rng: np.random.Generator | None = None,
) -> Tensor:
    """Per-node scalar predictions, shape (B, N)."""
    dtype = params["input_proj.weight"].dtype
    b, n, _ = batch.features.shape
    h = embed_inputs(params, batch)

    bias = T.embedding_lookup(params["spatial_bias.table"], batch.spd)  # (B, N, N, heads)
    bias = T.transpose(bias, (0, 3, 1, 2))
    key_mask = Tensor(
        np.where(batch.mask[:, None, None, :], 0.0, _NEG_MASK).astype(dtype)
    )
    for i in range(cfg.num_layers):
        h = attention_layer(params, i, h, bias, key_mask, cfg, training, rng)
    h = T.layer_norm(h, params["final_norm.gamma"], params["final_norm.beta"])
    out = h @ params["head.weight"] + params["head.bias"]
    return T.reshape(out, (b, n))


def predict_classes(predictions: np.ndarray) -> np.ndarray:
    """Nearest ordinal class: round and clamp to [0, 4]."""
    return np.clip(np.rint(predictions), 0, 4).astype(np.int32)
