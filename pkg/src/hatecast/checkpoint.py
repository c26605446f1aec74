"""Named-tensor checkpoint container.

Layout (little-endian throughout):

    magic       4 bytes  b"HCKP"
    version     u32      currently 1
    meta        u32 length + utf-8 JSON (model/config echo)
    count       u32      number of tensors
    per tensor: u16 name length + utf-8 name
                u8  dtype code (0 = f32, 1 = f64)
                u8  ndim
                ndim x u32 dims
                row-major data bytes

Tensors are written sorted by name so files are byte-stable.
"""

from __future__ import annotations

import json
import struct

import numpy as np

from .tensor import Tensor

MAGIC = b"HCKP"
VERSION = 1

_DTYPE_CODES = {np.dtype("float32"): 0, np.dtype("float64"): 1}
_CODE_DTYPES = {0: np.dtype("<f4"), 1: np.dtype("<f8")}


class CheckpointError(ValueError):
    pass


def save_checkpoint(path, params: dict[str, Tensor], meta: dict) -> None:
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", VERSION))
        meta_raw = json.dumps(meta, sort_keys=True, separators=(",", ":")).encode("utf-8")
        fh.write(struct.pack("<I", len(meta_raw)))
        fh.write(meta_raw)
        fh.write(struct.pack("<I", len(params)))
        for name in sorted(params):
            arr = params[name].data if isinstance(params[name], Tensor) else np.asarray(params[name])
            code = _DTYPE_CODES.get(arr.dtype)
            if code is None:
                raise CheckpointError(f"tensor {name!r}: unsupported dtype {arr.dtype}")
            raw_name = name.encode("utf-8")
            fh.write(struct.pack("<H", len(raw_name)))
            fh.write(raw_name)
            fh.write(struct.pack("<BB", code, arr.ndim))
            for dim in arr.shape:
                fh.write(struct.pack("<I", dim))
            fh.write(np.ascontiguousarray(arr, dtype=arr.dtype.newbyteorder("<")).tobytes())


def load_checkpoint(path) -> tuple[dict[str, np.ndarray], dict]:
    with open(path, "rb") as fh:
        if fh.read(4) != MAGIC:
            raise CheckpointError(f"{path}: not a hatecast checkpoint")
        (version,) = struct.unpack("<I", fh.read(4))
        if version != VERSION:
            raise CheckpointError(f"{path}: unsupported checkpoint version {version}")
        (meta_len,) = struct.unpack("<I", fh.read(4))
        meta = json.loads(fh.read(meta_len).decode("utf-8"))
        (count,) = struct.unpack("<I", fh.read(4))
        tensors: dict[str, np.ndarray] = {}
        for _ in range(count):
            (name_len,) = struct.unpack("<H", fh.read(2))
            name = fh.read(name_len).decode("utf-8")
            code, ndim = struct.unpack("<BB", fh.read(2))
            shape = tuple(struct.unpack("<I", fh.read(4))[0] for _ in range(ndim))
            dtype = _CODE_DTYPES[code]
            n_items = int(np.prod(shape)) if shape else 1
            raw = fh.read(n_items * dtype.itemsize)
            tensors[name] = np.frombuffer(raw, dtype=dtype).reshape(shape).copy()
    return tensors, meta
