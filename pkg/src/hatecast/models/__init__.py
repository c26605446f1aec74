"""Node-level forecasting models sharing one encoded-graph input contract."""

from .gat import GATConfig, forward_gat, init_gat
from .graphormer import ModelConfig, forward_graphormer, init_graphormer, predict_classes

# registry used by the training loop and CLI: name -> (config ctor, init, forward)
MODEL_REGISTRY = {
    "graphormer": (ModelConfig, init_graphormer, forward_graphormer),
    "gat": (GATConfig, init_gat, forward_gat),
}

__all__ = [
    "GATConfig",
    "ModelConfig",
    "MODEL_REGISTRY",
    "forward_gat",
    "forward_graphormer",
    "init_gat",
    "init_graphormer",
    "predict_classes",
]
