import numpy as np
import pytest

from conftest import random_tree
from hatecast.encoding import assign_splits, encode_tree, pad_graphs
from hatecast.features import HashedProvider
from hatecast.labeling import LabelWeights, label_dataset
from hatecast.models import GATConfig, ModelConfig
from hatecast.training import (
    AdamW,
    EvalReport,
    TrainConfig,
    TrainingError,
    adamw_step,
    evaluate,
    lr_at,
    masked_l2,
    masked_mse_loss,
    train,
)
from hatecast import tensor as T
from hatecast.tensor import Tensor

PROVIDER = HashedProvider(6, frozenset({"vile"}))
TINY = ModelConfig(num_layers=1, hidden_dim=8, num_heads=2, ffn_dim=16, dropout=0.0)


def make_graphs(rng, n=12, split_seed=0, fractions=(0.7, 0.1, 0.2)):
    graphs = []
    for k in range(n):
        tree = random_tree(rng, max_nodes=12, prefix=f"t{k}-")
        label_dataset([tree], LabelWeights())
        graphs.append(encode_tree(tree, PROVIDER))
    return assign_splits(graphs, fractions, split_seed)


class TestLrSchedule:
    def test_endpoints_and_peak(self):
        assert lr_at(0, 2e-4, 10, 100) == 0.0
        assert lr_at(10, 2e-4, 10, 100) == pytest.approx(2e-4)
        assert lr_at(100, 2e-4, 10, 100) == 0.0

    def test_piecewise_linear_and_peak_is_max(self):
        values = [lr_at(s, 1e-3, 25, 200) for s in range(201)]
        assert max(values) == pytest.approx(1e-3)
        # continuous: adjacent steps differ by one of two fixed increments
        ramp = values[1] - values[0]
        decay = values[26] - values[25]
        for s in range(200):
            assert values[s + 1] - values[s] == pytest.approx(ramp if s < 25 else decay)

    def test_bounds(self):
        with pytest.raises(ValueError):
            lr_at(-1, 1e-3, 5, 10)
        with pytest.raises(ValueError):
            lr_at(5, 1e-3, 20, 10)


class TestAdamW:
    def test_hand_derived_first_step(self):
        value = np.array([1.0])
        m, v = np.zeros(1), np.zeros(1)
        adamw_step(value, np.array([1.0]), m, v, 1, 0.1, (0.9, 0.999), 1e-8, 0.0)
        assert value[0] == pytest.approx(0.9, abs=1e-7)

    def test_zero_grad_no_move(self):
        value = np.array([2.0])
        adamw_step(value, np.zeros(1), np.zeros(1), np.zeros(1), 1, 0.1, (0.9, 0.999), 1e-8, 0.0)
        assert value[0] == 2.0

    def test_decoupled_decay(self):
        value = np.array([3.0])
        adamw_step(value, np.zeros(1), np.zeros(1), np.zeros(1), 1, 0.1, (0.9, 0.999), 1e-8, 0.1)
        assert value[0] == pytest.approx(3.0 * (1 - 0.01))

    def test_nan_grad_aborts(self):
        p = T.parameter(np.ones(2))
        p.grad = np.array([np.nan, 1.0])
        opt = AdamW({"w": p}, TrainConfig())
        with pytest.raises(TrainingError, match="w"):
            opt.step(1e-3)


class TestMaskedLoss:
    def test_perfect_predictions(self):
        preds = np.array([0.0, 4.0])
        labels = np.array([0.0, 4.0])
        split = np.array([0, 0], dtype=np.int8)
        assert masked_l2(preds, labels, split, "train") == 0.0

    def test_direct_arithmetic(self):
        preds = np.array([0.0, 0.0])
        labels = np.array([0.0, 4.0])
        split = np.array([2, 2], dtype=np.int8)
        assert masked_l2(preds, labels, split, "test") == pytest.approx(8.0)

    def test_empty_split_raises(self):
        with pytest.raises(TrainingError):
            masked_l2(np.zeros(2), np.zeros(2), np.zeros(2, dtype=np.int8), "test")

    def test_masking_ignores_other_splits(self, rng):
        graphs = make_graphs(rng, 4)
        batch = pad_graphs(graphs)
        pred = Tensor(rng.normal(size=batch.labels.shape).astype(np.float32))
        base = float(masked_mse_loss(pred, batch, 0)[0].data)
        batch.labels[batch.split == 2] += 7  # tamper with test labels only
        assert float(masked_mse_loss(pred, batch, 0)[0].data) == base

    def test_batched_equals_per_graph(self, rng):
        graphs = make_graphs(rng, 5, fractions=(1.0, 0.0, 0.0))
        batch = pad_graphs(graphs)
        pred = Tensor(np.zeros(batch.labels.shape, dtype=np.float32))
        batched, count = masked_mse_loss(pred, batch, 0)
        total = 0.0
        n = 0
        for g in graphs:
            diff = 0.0 - g.labels.astype(np.float64)
            total += float((diff**2).sum())
            n += g.num_nodes
        assert count == n
        assert float(batched.data) == pytest.approx(total / n, rel=1e-6)


class TestTrainLoop:
    def test_determinism(self, rng):
        graphs = make_graphs(rng)
        cfg = TrainConfig(peak_lr=1e-3, total_epochs=3, batch_size=4, seed=11)
        r1 = train("graphormer", graphs, TINY, cfg)
        r2 = train("graphormer", graphs, TINY, cfg)
        assert r1.history == r2.history
        for k in r1.params:
            assert np.array_equal(r1.params[k], r2.params[k])

    def test_zero_lr_freezes_loss(self, rng):
        graphs = make_graphs(rng)
        cfg = TrainConfig(peak_lr=1e-30, total_epochs=3, batch_size=4, seed=0)
        result = train("graphormer", graphs, TINY, cfg)
        losses = [h["train_loss"] for h in result.history]
        assert losses[0] == pytest.approx(losses[-1], rel=1e-5)

    def test_gat_trains_too(self, rng):
        graphs = make_graphs(rng)
        cfg = TrainConfig(peak_lr=1e-3, total_epochs=2, batch_size=4, seed=1)
        result = train("gat", graphs, GATConfig(hidden_dim=8, num_heads=2, dropout=0.0), cfg)
        assert result.steps == 2 * 3
        assert not result.diverged

    def test_best_checkpoint_selection(self, rng):
        graphs = make_graphs(rng)
        cfg = TrainConfig(peak_lr=5e-3, total_epochs=4, batch_size=4, seed=3)
        result = train("graphormer", graphs, TINY, cfg)
        vals = [h["val_loss"] for h in result.history]
        assert result.best_val == min(v for v in vals if v is not None)

    def test_quick_overfit_smoke(self, rng):
        # full memorization needs the desk preset (acceptance suite); here we
        # only require steady descent on a tiny model (6-dim hashed features
        # collide, so the floor is above zero)
        graphs = make_graphs(rng, n=4, fractions=(1.0, 0.0, 0.0))
        cfg = TrainConfig(peak_lr=1e-2, total_epochs=120, batch_size=4, seed=5, warmup_steps=10)
        result = train("graphormer", graphs, TINY, cfg)
        assert result.history[-1]["train_loss"] < 0.5 * result.history[0]["train_loss"]


class TestEvaluate:
    def test_perfect_predictor_all_zero(self, rng):
        graphs = make_graphs(rng, 6, fractions=(0.0, 0.0, 1.0))

        class Oracle:
            pass

        # evaluate with a graphormer whose output we cannot force; instead check
        # report internals directly with a constant-zero predictor on class-0 data
        for g in graphs:
            g.labels[:] = 0
        params = {
            k: v for k, v in _zero_graphormer(TINY, graphs[0].features.shape[1]).items()
        }
        report = evaluate(params, "graphormer", TINY, graphs, "test")
        assert report.overall_l2 == pytest.approx(0.0, abs=1e-8)

    def test_constant_zero_on_balanced_classes(self, rng):
        graphs = make_graphs(rng, 5, fractions=(0.0, 0.0, 1.0))
        # hand-plant one node of each class
        g = graphs[0]
        n = g.num_nodes
        if n < 5:
            pytest.skip("need 5 nodes")
        g.labels[:5] = [0, 1, 2, 3, 4]
        g.split[:] = -1
        g.split[:5] = 2
        for other in graphs[1:]:
            other.split[:] = -1
        params = _zero_graphormer(TINY, g.features.shape[1])
        report = evaluate(params, "graphormer", TINY, graphs, "test")
        assert report.per_class_l2 == [0.0, 1.0, 4.0, 9.0, 16.0]
        assert report.counts == [1, 1, 1, 1, 1]
        report.check_consistency()

    def test_report_consistency_identity(self, rng):
        graphs = make_graphs(rng, 10)
        cfg = TrainConfig(peak_lr=1e-3, total_epochs=1, batch_size=4, seed=2)
        result = train("graphormer", graphs, TINY, cfg)
        report = evaluate(result.params, "graphormer", TINY, graphs, "test")
        report.check_consistency()
        tsv = report.to_tsv("Graphormer")
        assert tsv.splitlines()[0] == "method\tAll\t0\t1\t2\t3\t4"


def _zero_graphormer(cfg, d_in):
    """Parameters that force the forward output to exactly zero."""
    from hatecast.models import init_graphormer

    params = init_graphormer(cfg, d_in, seed=0)
    params["head.weight"].data[:] = 0
    params["head.bias"].data[:] = 0
    return {k: v.data for k, v in params.items()}
