"""Blockwise frequency transforms and the stacked coefficient volume.

Each input channel is split into non-overlapping square blocks and every
block is transformed independently:

* 2-D DFT (unnormalized forward), giving a real and an imaginary plane of
  the original channel size;
* single-level orthonormal Haar analysis, giving four half-resolution
  subbands (ll, hl, lh, hh) that are collected by block position.

``assemble_frequency_cube`` chains an optional colorspace conversion, the
per-channel transforms, nearest-neighbor upsampling of subbands back to the
input size, and channel-last concatenation in a fixed channel order. With
both transforms on a 3-channel input the cube has 18 channels: 2 x 3 from
the DFT and 4 x 3 from the DWT.

Raw DFT coefficients are orders of magnitude larger at DC than elsewhere,
so a per-channel standardization (``ChannelNormalizer``) is fitted on
training cubes and persisted with models.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, NamedTuple

import numpy as np

from ._validate import require_channel, require_image
from .colorspace import ITU601, rgb_to_ycbcr
from .errors import InvalidConfigError, InvalidInputError

_SQRT2 = math.sqrt(2.0)

#: Allowed block sizes; None means one block spanning the whole image.
BLOCK_SIZES = (8, 16, 32, None)

NORMALIZER_STD_FLOOR = 1e-8


class SubbandSet(NamedTuple):
    """The four half-resolution planes of one level of 2-D Haar analysis."""

    ll: np.ndarray
    hl: np.ndarray
    lh: np.ndarray
    hh: np.ndarray


@dataclass(frozen=True)
class TransformConfig:
    """Settings for frequency-cube assembly (the three ablation axes)."""

    colorspace: str = "ycbcr"
    transforms: tuple[str, ...] = ("dft", "dwt")
    block_size: int | None = 8
    chroma_swap: bool = False

    def __post_init__(self) -> None:
        if self.colorspace not in ("rgb", "ycbcr"):
            raise InvalidConfigError(f"unknown colorspace {self.colorspace!r}")
        transforms = tuple(self.transforms)
        if not transforms:
            raise InvalidConfigError("transform set must not be empty")
        if set(transforms) - {"dft", "dwt"}:
            raise InvalidConfigError(f"unknown transforms in {transforms!r}")
        if len(set(transforms)) != len(transforms):
            raise InvalidConfigError(f"duplicate transforms in {transforms!r}")
        # canonical order: dft channels come before dwt channels
        ordered = tuple(t for t in ("dft", "dwt") if t in transforms)
        object.__setattr__(self, "transforms", ordered)
        if self.block_size not in BLOCK_SIZES:
            raise InvalidConfigError(
                f"block_size must be one of {BLOCK_SIZES}, got {self.block_size!r}"
            )

    @property
    def channel_count(self) -> int:
        return 6 * ("dft" in self.transforms) + 12 * ("dwt" in self.transforms)


@dataclass(frozen=True)
class FrequencyCube:
    """A channel-last stack of frequency coefficients with named channels."""

    data: np.ndarray
    channel_names: tuple[str, ...]

    def __post_init__(self) -> None:
        data = np.asarray(self.data)
        if data.ndim != 3:
            raise InvalidInputError(f"cube data must be (H, W, C), got {data.shape}")
        if len(self.channel_names) != data.shape[2]:
            raise InvalidInputError(
                f"{len(self.channel_names)} channel names for {data.shape[2]} channels"
            )
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "channel_names", tuple(self.channel_names))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]


def _resolve_block(shape: tuple[int, int], block_size: int | None) -> tuple[int, int]:
    h, w = shape
    if block_size is None:
        return h, w
    if block_size < 1:
        raise InvalidInputError(f"block_size must be >= 1, got {block_size}")
    if h % block_size or w % block_size:
        raise InvalidInputError(
            f"image dims {h}x{w} are not multiples of block size {block_size}"
        )
    return block_size, block_size


def _to_blocks(channel: np.ndarray, bh: int, bw: int) -> np.ndarray:
    h, w = channel.shape
    return channel.reshape(h // bh, bh, w // bw, bw).swapaxes(1, 2)


def _from_blocks(blocks: np.ndarray) -> np.ndarray:
    nbh, nbw, bh, bw = blocks.shape
    return blocks.swapaxes(1, 2).reshape(nbh * bh, nbw * bw)


def blockwise_dft(
    channel: np.ndarray, block_size: int | None = 8
) -> tuple[np.ndarray, np.ndarray]:
    """Unnormalized forward 2-D DFT of each non-overlapping block.

    Returns (real, imag) planes of the input size, with each block's
    coefficients written back at the block's spatial location.
    """
    channel = require_channel(channel)
    bh, bw = _resolve_block(channel.shape, block_size)
    spectra = np.fft.fft2(_to_blocks(channel, bh, bw), axes=(-2, -1))
    return _from_blocks(spectra.real), _from_blocks(spectra.imag)


def blockwise_idft(
    real: np.ndarray, imag: np.ndarray, block_size: int | None = 8
) -> np.ndarray:
    """Inverse of :func:`blockwise_dft` (1 / block-area normalization)."""
    real = require_channel(real, "real")
    imag = require_channel(imag, "imag")
    if real.shape != imag.shape:
        raise InvalidInputError(
            f"real/imag shape mismatch: {real.shape} vs {imag.shape}"
        )
    bh, bw = _resolve_block(real.shape, block_size)
    blocks = _to_blocks(real, bh, bw) + 1j * _to_blocks(imag, bh, bw)
    return _from_blocks(np.fft.ifft2(blocks, axes=(-2, -1)).real)


def blockwise_haar_dwt(channel: np.ndarray, block_size: int | None = 8) -> SubbandSet:
    """Single-level orthonormal Haar analysis inside each block.

    Low/high filters (1/sqrt2) [1, 1] and (1/sqrt2) [1, -1] run along rows
    then columns; the per-block subband patches are collected by block
    position into four (H/2, W/2) planes.
    """
    channel = require_channel(channel)
    bh, bw = _resolve_block(channel.shape, block_size)
    if bh % 2 or bw % 2:
        raise InvalidInputError(f"block size {bh}x{bw} must be even for Haar analysis")
    blocks = _to_blocks(channel, bh, bw)
    row_lo = (blocks[..., :, 0::2] + blocks[..., :, 1::2]) / _SQRT2
    row_hi = (blocks[..., :, 0::2] - blocks[..., :, 1::2]) / _SQRT2
    ll = (row_lo[..., 0::2, :] + row_lo[..., 1::2, :]) / _SQRT2
    lh = (row_lo[..., 0::2, :] - row_lo[..., 1::2, :]) / _SQRT2
    hl = (row_hi[..., 0::2, :] + row_hi[..., 1::2, :]) / _SQRT2
    hh = (row_hi[..., 0::2, :] - row_hi[..., 1::2, :]) / _SQRT2
    return SubbandSet(*(_from_blocks(b) for b in (ll, hl, lh, hh)))


def blockwise_haar_idwt(subbands: SubbandSet, block_size: int | None = 8) -> np.ndarray:
    """Exact synthesis inverse of :func:`blockwise_haar_dwt`."""
    ll, hl, lh, hh = (require_channel(b, n) for b, n in zip(subbands, "ll hl lh hh".split()))
    if not (ll.shape == hl.shape == lh.shape == hh.shape):
        raise InvalidInputError("subband shape mismatch")
    h2, w2 = ll.shape
    _resolve_block((2 * h2, 2 * w2), block_size)  # partition consistency check
    out = np.empty((2 * h2, 2 * w2), dtype=np.result_type(ll, hl, lh, hh))
    out[0::2, 0::2] = (ll + hl + lh + hh) / 2.0
    out[0::2, 1::2] = (ll - hl + lh - hh) / 2.0
    out[1::2, 0::2] = (ll + hl - lh - hh) / 2.0
    out[1::2, 1::2] = (ll - hl - lh + hh) / 2.0
    return out


def upsample_nearest(channel: np.ndarray, factor: int) -> np.ndarray:
    """Replicate each value into a factor x factor tile."""
    channel = require_channel(channel)
    if not isinstance(factor, (int, np.integer)) or factor < 1:
        raise InvalidInputError(f"upsampling factor must be an integer >= 1, got {factor}")
    if factor == 1:
        return channel.copy()
    return np.repeat(np.repeat(channel, factor, axis=0), factor, axis=1)


def channel_labels(colorspace: str) -> tuple[str, str, str]:
    return ("Y", "Cb", "Cr") if colorspace == "ycbcr" else ("R", "G", "B")


def cube_channel_names(config: TransformConfig) -> tuple[str, ...]:
    """The fixed channel order: all DFT planes first, then all subbands."""
    labels = channel_labels(config.colorspace)
    names: list[str] = []
    if "dft" in config.transforms:
        for c in labels:
            names += [f"{c}.dft.re", f"{c}.dft.im"]
    if "dwt" in config.transforms:
        for c in labels:
            names += [f"{c}.ll", f"{c}.hl", f"{c}.lh", f"{c}.hh"]
    return tuple(names)


def assemble_frequency_cube(img: np.ndarray, config: TransformConfig) -> FrequencyCube:
    """Build the frequency cube of a 3-channel pixel image.

    Deterministic: identical input and config give a bit-identical cube.
    """
    img = require_image(img, channels=3)
    if not config.transforms:
        raise InvalidConfigError("transform set must not be empty")
    if config.colorspace == "ycbcr":
        planes = rgb_to_ycbcr(img, ITU601, chroma_swap=config.chroma_swap)
    else:
        planes = img
    chans: list[np.ndarray] = []
    if "dft" in config.transforms:
        for c in range(3):
            real, imag = blockwise_dft(planes[..., c], config.block_size)
            chans += [real, imag]
    if "dwt" in config.transforms:
        for c in range(3):
            subbands = blockwise_haar_dwt(planes[..., c], config.block_size)
            chans += [upsample_nearest(band, 2) for band in subbands]
    data = np.stack(chans, axis=-1)
    return FrequencyCube(data=data, channel_names=cube_channel_names(config))


@dataclass(frozen=True)
class ChannelNormalizer:
    """Per-channel affine standardization (std floored at 1e-8)."""

    mean: np.ndarray
    std: np.ndarray

    def __post_init__(self) -> None:
        mean = np.asarray(self.mean, dtype=np.float64).reshape(-1)
        std = np.asarray(self.std, dtype=np.float64).reshape(-1)
        if mean.shape != std.shape:
            raise InvalidConfigError("mean/std length mismatch")
        if np.any(std < NORMALIZER_STD_FLOOR):
            raise InvalidConfigError(f"std entries must be >= {NORMALIZER_STD_FLOOR}")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "std", std)

    @property
    def channels(self) -> int:
        return self.mean.shape[0]


def fit_channel_normalizer(cubes: Iterable[FrequencyCube]) -> ChannelNormalizer:
    """Per-channel mean/std over all spatial positions of a cube stream.

    Population statistics, accumulated in one streaming pass.
    """
    count = 0
    s1 = s2 = None
    channels = None
    for cube in cubes:
        data = np.asarray(cube.data, dtype=np.float64)
        if channels is None:
            channels = data.shape[2]
            s1 = np.zeros(channels)
            s2 = np.zeros(channels)
        elif data.shape[2] != channels:
            raise InvalidInputError(
                f"cube with {data.shape[2]} channels in a {channels}-channel stream"
            )
        count += data.shape[0] * data.shape[1]
        s1 += data.sum(axis=(0, 1))
        s2 += np.square(data).sum(axis=(0, 1))
    if count == 0:
        raise InvalidInputError("cannot fit a normalizer on an empty cube stream")
    mean = s1 / count
    var = np.maximum(s2 / count - np.square(mean), 0.0)
    std = np.maximum(np.sqrt(var), NORMALIZER_STD_FLOOR)
    return ChannelNormalizer(mean=mean, std=std)


def _check_norm_channels(cube: FrequencyCube, norm: ChannelNormalizer) -> None:
    if cube.channels != norm.channels:
        raise InvalidInputError(
            f"cube has {cube.channels} channels, normalizer expects {norm.channels}"
        )


def apply_normalizer(cube: FrequencyCube, norm: ChannelNormalizer) -> FrequencyCube:
    _check_norm_channels(cube, norm)
    return FrequencyCube((cube.data - norm.mean) / norm.std, cube.channel_names)


def unapply_normalizer(cube: FrequencyCube, norm: ChannelNormalizer) -> FrequencyCube:
    _check_norm_channels(cube, norm)
    return FrequencyCube(cube.data * norm.std + norm.mean, cube.channel_names)


# --- FQC1 cube file format ---------------------------------------------------
#
# magic "FQC1", little-endian u32 height/width/channels, then
# height*width*channels little-endian float32 values, channel-last row-major.

FQC_MAGIC = b"FQC1"


def write_fqc(path: str | Path, cube: FrequencyCube | np.ndarray) -> None:
    data = cube.data if isinstance(cube, FrequencyCube) else np.asarray(cube)
    if data.ndim != 3:
        raise InvalidInputError(f"cube data must be (H, W, C), got {data.shape}")
    h, w, c = data.shape
    with open(path, "wb") as fh:
        fh.write(FQC_MAGIC)
        fh.write(struct.pack("<III", h, w, c))
        fh.write(np.ascontiguousarray(data, dtype="<f4").tobytes())


def read_fqc(path: str | Path) -> np.ndarray:
    """Read an FQC1 file back as an (H, W, C) float32 array."""
    raw = Path(path).read_bytes()
    if raw[:4] != FQC_MAGIC:
        raise InvalidInputError(f"{path}: not an FQC1 file")
    h, w, c = struct.unpack("<III", raw[4:16])
    expected = 16 + 4 * h * w * c
    if len(raw) != expected:
        raise InvalidInputError(f"{path}: expected {expected} bytes, found {len(raw)}")
    return np.frombuffer(raw, dtype="<f4", offset=16).reshape(h, w, c).copy()


def config_to_dict(config: TransformConfig) -> dict:
    return {
        "colorspace": config.colorspace,
        "transforms": list(config.transforms),
        "block_size": config.block_size,
        "chroma_swap": config.chroma_swap,
    }


def config_from_dict(d: dict) -> TransformConfig:
    return TransformConfig(
        colorspace=d["colorspace"],
        transforms=tuple(d["transforms"]),
        block_size=d["block_size"],
        chroma_swap=d.get("chroma_swap", False),
    )


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def dumps_json(obj) -> str:
    """JSON dump that tolerates numpy scalars/arrays."""
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default)
