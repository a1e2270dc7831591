import json
import struct

import numpy as np
import pytest

from fakedet import (
    ChannelNormalizer,
    InvalidInputError,
    NetworkSpec,
    TransformConfig,
    forward,
    init_params,
    load_model,
    save_model,
)


def small_model(dtype=np.float64, with_normalizer=True):
    spec = NetworkSpec(input_channels=6, stem_width=4, block_widths=(4, 8))
    params = init_params(spec, 5).astype(dtype)
    if with_normalizer:
        rng = np.random.default_rng(5)
        params.normalizer = ChannelNormalizer(
            mean=rng.standard_normal(6), std=rng.random(6) + 0.5
        )
        params.transform_config = TransformConfig(transforms=("dft",))
    params.metadata = {"stream": "frequency", "best_epoch": 3, "note": "unit test"}
    return params


def test_round_trip_bit_exact_float64(tmp_path):
    params = small_model()
    path = tmp_path / "m.fdm"
    save_model(path, params)
    back = load_model(path)
    assert back.spec == params.spec
    for name, tensor in params.tensors.items():
        assert back.tensors[name].dtype == np.float64
        assert (back.tensors[name] == tensor).all()
    assert (back.normalizer.mean == params.normalizer.mean).all()
    assert (back.normalizer.std == params.normalizer.std).all()
    assert back.transform_config == params.transform_config
    assert back.metadata == params.metadata


def test_round_trip_bit_exact_float32(tmp_path):
    params = small_model(dtype=np.float32)
    path = tmp_path / "m.fdm"
    save_model(path, params)
    back = load_model(path)
    for name, tensor in params.tensors.items():
        assert back.tensors[name].dtype == np.float32
        assert (back.tensors[name] == tensor).all()


def test_save_load_save_is_byte_identical(tmp_path):
    params = small_model()
    first = tmp_path / "a.fdm"
    second = tmp_path / "b.fdm"
    save_model(first, params)
    save_model(second, load_model(first))
    assert first.read_bytes() == second.read_bytes()


def test_loaded_model_predicts_identically(tmp_path):
    params = small_model()
    path = tmp_path / "m.fdm"
    save_model(path, params)
    back = load_model(path)
    batch = np.random.default_rng(6).random((3, 8, 8, 6))
    assert (forward(back, batch) == forward(params, batch)).all()


def test_header_layout(tmp_path):
    params = small_model()
    path = tmp_path / "m.fdm"
    save_model(path, params)
    raw = path.read_bytes()
    assert raw[:4] == b"FDM1"
    (header_len,) = struct.unpack("<I", raw[4:8])
    header = json.loads(raw[8 : 8 + header_len].decode("utf-8"))
    assert header["format"] == "FDM1"
    assert header["spec"]["input_channels"] == 6
    names = [e["name"] for e in header["tensors"]]
    assert names == sorted(names)
    # offsets index the blob section contiguously
    offset = 0
    for entry in header["tensors"]:
        assert entry["offset"] == offset
        item = 4 if entry["dtype"] == "<f4" else 8
        offset += int(np.prod(entry["shape"])) * item
    assert len(raw) == 8 + header_len + offset


def test_model_without_normalizer(tmp_path):
    params = small_model(with_normalizer=False)
    path = tmp_path / "m.fdm"
    save_model(path, params)
    back = load_model(path)
    assert back.normalizer is None
    assert back.transform_config is None


def test_load_rejects_bad_magic(tmp_path):
    params = small_model()
    path = tmp_path / "m.fdm"
    save_model(path, params)
    bad = tmp_path / "bad.fdm"
    bad.write_bytes(b"NOPE" + path.read_bytes()[4:])
    with pytest.raises(InvalidInputError):
        load_model(bad)


def test_load_rejects_truncation(tmp_path):
    params = small_model()
    path = tmp_path / "m.fdm"
    save_model(path, params)
    short = tmp_path / "short.fdm"
    short.write_bytes(path.read_bytes()[:-16])
    with pytest.raises(InvalidInputError):
        load_model(short)


def test_load_rejects_corrupt_header(tmp_path):
    params = small_model()
    path = tmp_path / "m.fdm"
    save_model(path, params)
    raw = bytearray(path.read_bytes())
    (header_len,) = struct.unpack("<I", raw[4:8])
    raw[8 : 8 + 2] = b"{X"
    bad = tmp_path / "bad.fdm"
    bad.write_bytes(bytes(raw))
    with pytest.raises(InvalidInputError):
        load_model(bad)
