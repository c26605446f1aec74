"""Binary container for encoded datasets.

Layout (all integers little-endian, arrays row-major little-endian):

    magic           4 bytes  b"HCDS"
    version         u32      currently 1
    num_graphs      u32
    d_in            u32      feature width (d_text + 1)
    max_spd         u32      clamp applied to the SPD matrix
    max_degree      u32      clamp applied to degree vectors
    split_seed      u64      seed used by assign_splits
    f_train, f_val, f_test   3 x f64   split fractions

    then per graph:
    graph_id        u32 length + utf-8 bytes
    community       u32 length + utf-8 bytes
    n_nodes         u32
    node_ids        n x (u32 length + utf-8 bytes)
    features        n * d_in  f32
    in_degree       n         i32
    out_degree      n         i32
    spd             n * n     i32
    labels          n         i32
    split           n         i8
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .encoding import EncodedGraph

MAGIC = b"HCDS"
VERSION = 1


class ContainerError(ValueError):
    pass


@dataclass
class DatasetMeta:
    d_in: int
    max_spd: int
    max_degree: int
    split_seed: int
    fractions: tuple[float, float, float]


def _write_str(fh, s: str) -> None:
    raw = s.encode("utf-8")
    fh.write(struct.pack("<I", len(raw)))
    fh.write(raw)


def _read_str(fh) -> str:
    (n,) = struct.unpack("<I", fh.read(4))
    return fh.read(n).decode("utf-8")


def _write_array(fh, arr: np.ndarray, dtype: str) -> None:
    fh.write(np.ascontiguousarray(arr, dtype=dtype).tobytes())


def _read_array(fh, count: int, dtype: str) -> np.ndarray:
    raw = fh.read(count * np.dtype(dtype).itemsize)
    return np.frombuffer(raw, dtype=dtype).copy()


def write_dataset(path, graphs: list[EncodedGraph], meta: DatasetMeta) -> None:
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<IIIII", VERSION, len(graphs), meta.d_in, meta.max_spd, meta.max_degree))
        fh.write(struct.pack("<Q", meta.split_seed))
        fh.write(struct.pack("<ddd", *meta.fractions))
        for g in graphs:
            _write_str(fh, g.graph_id)
            _write_str(fh, g.community)
            n = g.num_nodes
            fh.write(struct.pack("<I", n))
            for node_id in g.node_ids:
                _write_str(fh, node_id)
            _write_array(fh, g.features, "<f4")
            _write_array(fh, g.in_degree, "<i4")
            _write_array(fh, g.out_degree, "<i4")
            _write_array(fh, g.spd, "<i4")
            _write_array(fh, g.labels, "<i4")
            _write_array(fh, g.split, "<i1")


def read_dataset(path) -> tuple[list[EncodedGraph], DatasetMeta]:
    with open(path, "rb") as fh:
        if fh.read(4) != MAGIC:
            raise ContainerError(f"{path}: not a hatecast dataset container")
        version, num_graphs, d_in, max_spd, max_degree = struct.unpack("<IIIII", fh.read(20))
        if version != VERSION:
            raise ContainerError(f"{path}: unsupported container version {version}")
        (split_seed,) = struct.unpack("<Q", fh.read(8))
        fractions = struct.unpack("<ddd", fh.read(24))
        meta = DatasetMeta(d_in, max_spd, max_degree, split_seed, fractions)
        graphs = []
        for _ in range(num_graphs):
            graph_id = _read_str(fh)
            community = _read_str(fh)
            (n,) = struct.unpack("<I", fh.read(4))
            node_ids = [_read_str(fh) for _ in range(n)]
            features = _read_array(fh, n * d_in, "<f4").reshape(n, d_in)
            in_degree = _read_array(fh, n, "<i4")
            out_degree = _read_array(fh, n, "<i4")
            spd = _read_array(fh, n * n, "<i4").reshape(n, n)
            labels = _read_array(fh, n, "<i4")
            split = _read_array(fh, n, "<i1")
            graphs.append(
                EncodedGraph(graph_id, community, node_ids, features, in_degree, out_degree, spd, labels, split)
            )
    return graphs, meta
