"""Versioned model container.

Layout: magic "FDM1", little-endian u32 header length, UTF-8 JSON header,
then the concatenated little-endian tensor blobs in header index order.
The header records the network spec, transform config, normalizer stats,
free-form training metadata, and a tensor index (name, shape, dtype,
offset). Floats in the header are emitted with `repr`, which round-trips
binary64 exactly, and tensor payloads are raw bytes, so save followed by
load reproduces the model bit for bit.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .errors import InvalidInputError
from .network import ModelParams, spec_from_dict, spec_to_dict
from .transforms import ChannelNormalizer, config_from_dict, config_to_dict

MODEL_MAGIC = b"FDM1"

_BLOB_DTYPES = {"<f8": np.dtype("<f8"), "<f4": np.dtype("<f4")}


def save_model(path: str | Path, params: ModelParams) -> None:
    index = []
    blobs = []
    offset = 0
    for name in sorted(params.tensors):
        tensor = params.tensors[name]
        dtype = "<f4" if tensor.dtype == np.float32 else "<f8"
        blob = np.ascontiguousarray(tensor, dtype=dtype).tobytes()
        index.append(
            {"name": name, "shape": list(tensor.shape), "dtype": dtype, "offset": offset}
        )
        blobs.append(blob)
        offset += len(blob)
    header = {
        "format": "FDM1",
        "spec": spec_to_dict(params.spec),
        "transform_config": (
            config_to_dict(params.transform_config) if params.transform_config else None
        ),
        "normalizer": (
            {"mean": params.normalizer.mean.tolist(), "std": params.normalizer.std.tolist()}
            if params.normalizer
            else None
        ),
        "metadata": params.metadata,
        "tensors": index,
    }
    encoded = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MODEL_MAGIC)
        fh.write(struct.pack("<I", len(encoded)))
        fh.write(encoded)
        for blob in blobs:
            fh.write(blob)


def load_model(path: str | Path) -> ModelParams:
    raw = Path(path).read_bytes()
    if raw[:4] != MODEL_MAGIC:
        raise InvalidInputError(f"{path}: not a model file (bad magic)")
    (header_len,) = struct.unpack("<I", raw[4:8])
    try:
        header = json.loads(raw[8 : 8 + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise InvalidInputError(f"{path}: corrupt model header: {exc}") from exc
    base = 8 + header_len
    tensors: dict[str, np.ndarray] = {}
    for entry in header["tensors"]:
        dtype = _BLOB_DTYPES.get(entry["dtype"])
        if dtype is None:
            raise InvalidInputError(f"{path}: unsupported tensor dtype {entry['dtype']!r}")
        shape = tuple(entry["shape"])
        count = int(np.prod(shape)) if shape else 1
        start = base + entry["offset"]
        end = start + count * dtype.itemsize
        if end > len(raw):
            raise InvalidInputError(f"{path}: truncated tensor {entry['name']!r}")
        tensors[entry["name"]] = (
            np.frombuffer(raw[start:end], dtype=dtype).reshape(shape).copy()
        )
    normalizer = None
    if header.get("normalizer"):
        normalizer = ChannelNormalizer(
            mean=np.array(header["normalizer"]["mean"], dtype=np.float64),
            std=np.array(header["normalizer"]["std"], dtype=np.float64),
        )
    transform_config = None
    if header.get("transform_config"):
        transform_config = config_from_dict(header["transform_config"])
    return ModelParams(
        spec=spec_from_dict(header["spec"]),
        tensors=tensors,
        normalizer=normalizer,
        transform_config=transform_config,
        metadata=header.get("metadata", {}),
    )
