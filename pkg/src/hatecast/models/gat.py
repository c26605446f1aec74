"""Two-layer graph attention baseline with neighbourhood-limited aggregation.

Attention is restricted to direct neighbours (plus self-loops): non-adjacent
pairs get an additive mask that underflows to exactly zero weight after the
softmax, so a k-layer model is blind beyond k hops by construction.  Shares
the regression head, loss, and encoded inputs with the transformer so model
comparisons isolate the receptive field.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .. import tensor as T
from ..encoding import Batch
from ..tensor import Tensor

_NEG_MASK = -1e30


@dataclass(frozen=True)
class GATConfig:
    num_layers: int = 2
    hidden_dim: int = 64
    num_heads: int = 4
    dropout: float = 0.1
    leaky_slope: float = 0.2

    def __post_init__(self):
        if self.hidden_dim % self.num_heads != 0:
            raise ValueError(
                f"hidden_dim {self.hidden_dim} not divisible by num_heads {self.num_heads}"
            )

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "GATConfig":
        return cls(**d)


def init_gat(cfg: GATConfig, d_in: int, seed: int, dtype=np.float32) -> dict[str, Tensor]:
    rng = np.random.default_rng(seed)
    heads = cfg.num_heads
    dh = cfg.hidden_dim // heads

    def normal(*shape):
        return T.parameter(rng.normal(0.0, 0.02, size=shape), dtype)

    def zeros(*shape):
        return T.parameter(np.zeros(shape), dtype)

    p: dict[str, Tensor] = {"head.weight": normal(cfg.hidden_dim, 1), "head.bias": zeros(1)}
    in_dim = d_in
    for i in range(cfg.num_layers):
        p[f"layers.{i}.weight"] = normal(in_dim, cfg.hidden_dim)
        p[f"layers.{i}.bias"] = zeros(cfg.hidden_dim)
        p[f"layers.{i}.a_src"] = normal(heads, dh, 1)
        p[f"layers.{i}.a_dst"] = normal(heads, dh, 1)
        in_dim = cfg.hidden_dim
    return p


def gat_layer(
    params: dict[str, Tensor],
    layer: int,
    h: Tensor,
    allow_mask: Tensor,
    cfg: GATConfig,
    training: bool,
    rng: np.random.Generator | None,
) -> Tensor:
    """Masked attention over each node's neighbourhood (self-loop included)."""
    pre = f"layers.{layer}"
    b, n, _ = h.shape
    heads = cfg.num_heads
    dh = cfg.hidden_dim // heads

    wh = h @ params[f"{pre}.weight"] + params[f"{pre}.bias"]
    wh = T.transpose(T.reshape(wh, (b, n, heads, dh)), (0, 2, 1, 3))  # (B, heads, N, dh)
    e_src = wh @ params[f"{pre}.a_src"]  # (B, heads, N, 1)
    e_dst = wh @ params[f"{pre}.a_dst"]
    logits = T.leaky_relu(e_src + T.transpose(e_dst, (0, 1, 3, 2)), cfg.leaky_slope)
    logits = logits + allow_mask
    alpha = T.softmax(logits)
    if training and cfg.dropout > 0:
        alpha = T.dropout(alpha, cfg.dropout, rng, training)
    out = T.reshape(T.transpose(alpha @ wh, (0, 2, 1, 3)), (b, n, cfg.hidden_dim))
    return T.relu(out)


def neighbourhood_mask(batch: Batch, dtype) -> Tensor:
    """Additive logit mask allowing only direct neighbours and self-loops."""
    adj = batch.spd == 1
    eye = np.eye(adj.shape[1], dtype=bool)[None, :, :]
    allowed = (adj | eye) & batch.mask[:, :, None] & batch.mask[:, None, :]
    return Tensor(np.where(allowed[:, None, :, :], 0.0, _NEG_MASK).astype(dtype))


def forward_gat(
    params: dict[str, Tensor],
    batch: Batch,
    cfg: GATConfig,
    training: bool = False,
    rng: np.random.Generator | None = None,
) -> Tensor:
    """Per-node scalar predictions, shape (B, N)."""
    dtype = params["head.weight"].dtype
    b, n, _ = batch.features.shape
    allow_mask = neighbourhood_mask(batch, dtype)
    h = Tensor(batch.features.astype(dtype))
    for i in range(cfg.num_layers):
        h = gat_layer(params, i, h, allow_mask, cfg, training, rng)
    out = h @ params["head.weight"] + params["head.bias"]
    return T.reshape(out, (b, n))
