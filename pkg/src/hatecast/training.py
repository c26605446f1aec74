"""Optimization loop and evaluation: AdamW with warmup + linear decay,
masked mean-squared-error over split-selected nodes, and per-class reports.

Training is deterministic for a fixed seed and precision: parameter init,
batch order, and dropout all derive from the one TrainConfig seed.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import tensor as T
from .encoding import Batch, EncodedGraph, SPLIT_NAMES, SPLIT_TRAIN, SPLIT_VAL, make_batches
from .models import MODEL_REGISTRY
from .tensor import Tensor


class TrainingError(RuntimeError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    peak_lr: float = 2e-4
    total_epochs: int = 10
    batch_size: int = 16
    warmup_steps: int | None = None  # None -> 6% of total steps
    weight_decay: float = 0.01
    betas: tuple[float, float] = (0.9, 0.999)
    eps: float = 1e-8
    seed: int = 0
    precision: int = 32

    def __post_init__(self):
        if self.peak_lr <= 0 or self.total_epochs <= 0 or self.batch_size <= 0:
            raise ValueError("peak_lr, total_epochs and batch_size must be positive")
        if self.precision not in (32, 64):
            raise ValueError(f"precision must be 32 or 64, got {self.precision}")

    @property
    def dtype(self):
        return np.float32 if self.precision == 32 else np.float64

    def to_dict(self) -> dict:
        d = asdict(self)
        d["betas"] = list(self.betas)
        return d


def lr_at(step: int, peak_lr: float, warmup_steps: int, total_steps: int) -> float:
    """Linear ramp 0 -> peak over the warmup, then linear decay to 0."""
    if not 0 <= step <= total_steps:
        raise ValueError(f"step {step} outside [0, {total_steps}]")
    if warmup_steps >= total_steps:
        raise ValueError(f"warmup {warmup_steps} must be shorter than total {total_steps}")
    if step < warmup_steps:
        return peak_lr * step / warmup_steps
    return peak_lr * (total_steps - step) / (total_steps - warmup_steps)


def adamw_step(
    value: np.ndarray,
    grad: np.ndarray,
    m: np.ndarray,
    v: np.ndarray,
    t: int,
    lr: float,
    betas: tuple[float, float],
    eps: float,
    weight_decay: float,
) -> None:
    """One decoupled-weight-decay Adam update, in place on value/m/v."""
    b1, b2 = betas
    m *= b1
    m += (1 - b1) * grad
    v *= b2
    v += (1 - b2) * grad * grad
    m_hat = m / (1 - b1**t)
    v_hat = v / (1 - b2**t)
    value -= lr * m_hat / (np.sqrt(v_hat) + eps)
    if weight_decay:
        value -= lr * weight_decay * value


class AdamW:
    def __init__(self, params: dict[str, Tensor], cfg: TrainConfig):
        self.params = params
        self.cfg = cfg
        self.t = 0
        self.m = {k: np.zeros_like(p.data) for k, p in params.items()}
        self.v = {k: np.zeros_like(p.data) for k, p in params.items()}

    def step(self, lr: float) -> None:
        self.t += 1
        for name, p in self.params.items():
            if p.grad is None:
                continue
            if not np.all(np.isfinite(p.grad)):
                raise TrainingError(f"non-finite gradient in parameter {name!r}")
            adamw_step(
                p.data, p.grad, self.m[name], self.v[name], self.t,
                lr, self.cfg.betas, self.cfg.eps, self.cfg.weight_decay,
            )

    def zero_grad(self) -> None:
        for p in self.params.values():
            p.grad = None


def masked_mse_loss(pred: Tensor, batch: Batch, split: int) -> tuple[Tensor, int]:
    """Differentiable MSE over nodes in the chosen split; padding never matches."""
    select = (batch.split == split) & batch.mask
    count = int(select.sum())
    if count == 0:
        raise TrainingError(f"no nodes in split {split} for this batch")
    mask_t = Tensor(select.astype(pred.dtype))
    targets = Tensor(batch.labels.astype(pred.dtype))
    total = T.sum(T.mul(T.squared_error(pred, targets), mask_t))
    return T.scale(total, 1.0 / count), count


def masked_l2(
    predictions: np.ndarray, labels: np.ndarray, split: np.ndarray, which: str
) -> float:
    """Mean squared error over nodes whose split matches ``which``."""
    code = SPLIT_NAMES[which]
    select = split == code
    if not select.any():
        raise TrainingError(f"split {which!r} is empty")
    diff = predictions[select] - labels[select]
    return float(np.mean(diff * diff))


@dataclass
class EvalReport:
    which: str
    overall_l2: float
    per_class_l2: list[float | None]
    counts: list[int]
    config: dict = field(default_factory=dict)

    def check_consistency(self) -> None:
        weighted = 0.0
        n = 0
        for l2, c in zip(self.per_class_l2, self.counts):
            if c:
                weighted += l2 * c
                n += c
        assert n > 0 and abs(self.overall_l2 - weighted / n) <= 1e-9

    def to_tsv(self, method: str = "model") -> str:
        cells = [method, f"{self.overall_l2:.4f}"]
        cells += ["-" if c == 0 else f"{l2:.4f}" for l2, c in zip(self.per_class_l2, self.counts)]
        header = "method\tAll\t0\t1\t2\t3\t4"
        return header + "\n" + "\t".join(cells) + "\n"


@dataclass
class TrainResult:
    model: str
    params: dict[str, np.ndarray]        # best-validation snapshot
    final_params: dict[str, np.ndarray]
    history: list[dict]
    best_val: float | None
    diverged: bool
    steps: int
    model_config: dict
    train_config: dict
    d_in: int


def _forward_fn(model: str):
    if model not in MODEL_REGISTRY:
        raise TrainingError(f"unknown model {model!r}; choose from {sorted(MODEL_REGISTRY)}")
    return MODEL_REGISTRY[model]


def _predict_batches(params: dict[str, Tensor], model: str, model_cfg, batches: list[Batch]):
    _, _, forward = _forward_fn(model)
    for batch in batches:
        yield batch, forward(params, batch, model_cfg, training=False).data


def _dataset_l2(params, model, model_cfg, batches, split_code: int) -> float | None:
    total, count = 0.0, 0
    for batch, preds in _predict_batches(params, model, model_cfg, batches):
        select = (batch.split == split_code) & batch.mask
        if select.any():
            diff = preds[select] - batch.labels[select]
            total += float((diff * diff).sum())
            count += int(select.sum())
    return total / count if count else None


def train(
    model: str,
    graphs: list[EncodedGraph],
    model_cfg,
    cfg: TrainConfig,
) -> TrainResult:
    """Train to completion; retains the best-validation parameter snapshot.

    A non-finite loss aborts the run and returns the last good snapshot with
    ``diverged=True``.
    """
    if not graphs:
        raise TrainingError("empty dataset")
    _, init, forward = _forward_fn(model)
    d_in = graphs[0].features.shape[1]
    steps_per_epoch = math.ceil(len(graphs) / cfg.batch_size)
    total_steps = cfg.total_epochs * steps_per_epoch
    warmup = cfg.warmup_steps if cfg.warmup_steps is not None else max(1, int(0.06 * total_steps))

    def derived_seed(*key: int) -> int:
        return int(np.random.SeedSequence([cfg.seed, *key]).generate_state(1)[0])

    params = init(model_cfg, d_in, seed=derived_seed(1), dtype=cfg.dtype)
    dropout_rng = np.random.default_rng(derived_seed(2))
    opt = AdamW(params, cfg)
    eval_batches = make_batches(graphs, cfg.batch_size, shuffle=False)

    history: list[dict] = []
    best_val: float | None = None
    best_params = {k: p.data.copy() for k, p in params.items()}
    diverged = False
    step = 0

    for epoch in range(cfg.total_epochs):
        batches = make_batches(graphs, cfg.batch_size, seed=derived_seed(3, epoch), shuffle=True)
        epoch_sq, epoch_n = 0.0, 0
        last_lr = 0.0
        for batch in batches:
            pred = forward(params, batch, model_cfg, training=True, rng=dropout_rng)
            loss, count = masked_mse_loss(pred, batch, SPLIT_TRAIN)
            loss_value = float(loss.data)
            if not math.isfinite(loss_value):
                diverged = True
                break
            opt.zero_grad()
            loss.backward()
            last_lr = lr_at(step, cfg.peak_lr, warmup, total_steps)
            opt.step(last_lr)
            step += 1
            epoch_sq += loss_value * count
            epoch_n += count
        if diverged:
            break
        val_loss = _dataset_l2(params, model, model_cfg, eval_batches, SPLIT_VAL)
        entry = {
            "epoch": epoch,
            "train_loss": epoch_sq / epoch_n if epoch_n else None,
            "val_loss": val_loss,
            "lr": last_lr,
        }
        history.append(entry)
        if val_loss is None or best_val is None or val_loss < best_val:
            best_val = val_loss
            best_params = {k: p.data.copy() for k, p in params.items()}

    return TrainResult(
        model=model,
        params=best_params,
        final_params={k: p.data.copy() for k, p in params.items()},
        history=history,
        best_val=best_val,
        diverged=diverged,
        steps=step,
        model_config=model_cfg.to_dict(),
        train_config=cfg.to_dict(),
        d_in=d_in,
    )


def evaluate(
    params: dict[str, np.ndarray],
    model: str,
    model_cfg,
    graphs: list[EncodedGraph],
    which: str = "test",
    batch_size: int = 16,
    config_echo: dict | None = None,
) -> EvalReport:
    """Overall and per-true-class MSE over the chosen split."""
    code = SPLIT_NAMES[which]
    tensors = {k: Tensor(v) for k, v in params.items()}
    batches = make_batches(graphs, batch_size, shuffle=False)
    sq_by_class = np.zeros(5, dtype=np.float64)
    n_by_class = np.zeros(5, dtype=np.int64)
    for batch, preds in _predict_batches(tensors, model, model_cfg, batches):
        select = (batch.split == code) & batch.mask
        if not select.any():
            continue
        err = (preds[select] - batch.labels[select]) ** 2
        classes = batch.labels[select].astype(np.int64)
        np.add.at(sq_by_class, classes, err)
        np.add.at(n_by_class, classes, 1)
    total_n = int(n_by_class.sum())
    if total_n == 0:
        raise TrainingError(f"split {which!r} is empty")
    per_class = [
        float(sq_by_class[c] / n_by_class[c]) if n_by_class[c] else None for c in range(5)
    ]
    report = EvalReport(
        which=which,
        overall_l2=float(sq_by_class.sum() / total_n),
        per_class_l2=per_class,
        counts=[int(c) for c in n_by_class],
        config=config_echo or {},
    )
    return report
