import numpy as np
import pytest

from conftest import random_tree
from hatecast.checkpoint import CheckpointError, load_checkpoint, save_checkpoint
from hatecast.dataio import ContainerError, DatasetMeta, read_dataset, write_dataset
from hatecast.encoding import assign_splits, encode_tree
from hatecast.features import HashedProvider
from hatecast.labeling import LabelWeights, label_dataset
from hatecast.tensor import Tensor

PROVIDER = HashedProvider(5, frozenset())


def _graphs(rng, n=6):
    graphs = []
    for k in range(n):
        tree = random_tree(rng, max_nodes=15, prefix=f"d{k}-")
        label_dataset([tree], LabelWeights())
        graphs.append(encode_tree(tree, PROVIDER))
    return assign_splits(graphs, seed=7)


def test_dataset_roundtrip(tmp_path, rng):
    graphs = _graphs(rng)
    meta = DatasetMeta(6, 16, 64, 7, (0.7, 0.1, 0.2))
    path = tmp_path / "data.bin"
    write_dataset(path, graphs, meta)
    back, meta2 = read_dataset(path)
    assert meta2 == meta
    assert len(back) == len(graphs)
    for a, b in zip(graphs, back):
        assert a.graph_id == b.graph_id
        assert a.community == b.community
        assert a.node_ids == b.node_ids
        assert np.array_equal(a.features, b.features)
        assert np.array_equal(a.spd, b.spd)
        assert np.array_equal(a.in_degree, b.in_degree)
        assert np.array_equal(a.out_degree, b.out_degree)
        assert np.array_equal(a.labels, b.labels)
        assert np.array_equal(a.split, b.split)


def test_dataset_write_is_byte_stable(tmp_path, rng):
    graphs = _graphs(rng)
    meta = DatasetMeta(6, 16, 64, 7, (0.7, 0.1, 0.2))
    p1, p2 = tmp_path / "a.bin", tmp_path / "b.bin"
    write_dataset(p1, graphs, meta)
    write_dataset(p2, graphs, meta)
    assert p1.read_bytes() == p2.read_bytes()


def test_dataset_bad_magic(tmp_path):
    path = tmp_path / "x.bin"
    path.write_bytes(b"NOPE" + b"\x00" * 64)
    with pytest.raises(ContainerError):
        read_dataset(path)


def test_checkpoint_roundtrip(tmp_path, rng):
    params = {
        "a.weight": Tensor(rng.normal(size=(3, 4)).astype(np.float32)),
        "b.bias": Tensor(rng.normal(size=(4,)).astype(np.float64)),
    }
    meta = {"model": "graphormer", "d_in": 6}
    path = tmp_path / "ck.bin"
    save_checkpoint(path, params, meta)
    tensors, meta2 = load_checkpoint(path)
    assert meta2 == meta
    assert set(tensors) == {"a.weight", "b.bias"}
    assert tensors["a.weight"].dtype == np.float32
    assert tensors["b.bias"].dtype == np.float64
    assert np.array_equal(tensors["a.weight"], params["a.weight"].data)


def test_checkpoint_byte_stable(tmp_path, rng):
    params = {"w": Tensor(rng.normal(size=(2, 2)).astype(np.float32))}
    p1, p2 = tmp_path / "a.bin", tmp_path / "b.bin"
    save_checkpoint(p1, params, {"k": 1})
    save_checkpoint(p2, params, {"k": 1})
    assert p1.read_bytes() == p2.read_bytes()


def test_checkpoint_rejects_weird_dtype(tmp_path):
    with pytest.raises(CheckpointError):
        save_checkpoint(tmp_path / "x.bin", {"w": Tensor(np.zeros(2, dtype=np.int16))}, {})
