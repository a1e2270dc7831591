"""Deterministic synthetic corpus and labeled-directory ingestion.

Real surrogates are smooth Gaussian random fields plus a linear gradient.
Fake surrogates take the same kind of base and push it through an
average-pool / nearest-upsample cycle plus a faint pixel-pitch
checkerboard, the two signatures generator upsampling leaves in the
spectrum. Everything is a pure function of (config, index), so corpora
are reproducible and index-addressed.

Ingestion reads `real/` and `fake/` subdirectories of PNG or JPEG files
in lexicographic order and applies the shorter-edge center crop plus
bilinear resize used to square arbitrary inputs.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from ._validate import require_image
from .augment import MIN_BLUR_SIGMA, derive_rng, gaussian_filter
from .colorspace import rgb_to_ycbcr
from .errors import IngestionError, InvalidConfigError, InvalidInputError
from .transforms import blockwise_dft, dumps_json

log = logging.getLogger(__name__)

REAL_LABEL = 0
FAKE_LABEL = 1

SPLITS = ("train", "val", "test")

_IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg")

#: Keys the generator draws from; the base-field stream is shared by the
#: real image and the fake image of the same index by construction.
_BASE_STREAM = 0

#: Base-image composition: the blurred noise field is normalized to this
#: std before the gradient is added, and gradient slope magnitudes stay
#: inside this band. Keeping the gradient dominant makes the [0.1, 0.9]
#: rescale factor stable across images, which keeps the high-frequency
#: energy of real images tightly clustered below the artifact band.
_NOISE_STD = 0.10
_SLOPE_BAND = (0.5, 1.0)


@dataclass(frozen=True)
class SynthConfig:
    """Generator settings for the synthetic corpus."""

    size: int = 64
    base_smoothness: float = 2.0
    artifact_amplitude: float = 0.02
    upsample_factor: int = 2
    seed: int = 0

    def __post_init__(self) -> None:
        if not isinstance(self.size, (int, np.integer)) or self.size < 16:
            raise InvalidConfigError(f"size must be an integer >= 16, got {self.size!r}")
        if self.size % 16:
            # keeps 8x8 blocks and one halving step valid on every image
            raise InvalidConfigError(f"size must be a multiple of 16, got {self.size}")
        if not np.isfinite(self.base_smoothness) or self.base_smoothness < MIN_BLUR_SIGMA:
            raise InvalidConfigError(
                f"base_smoothness must be >= {MIN_BLUR_SIGMA}, got {self.base_smoothness}"
            )
        if not 0.0 <= self.artifact_amplitude <= 0.5:
            raise InvalidConfigError(
                f"artifact_amplitude must be in [0, 0.5], got {self.artifact_amplitude}"
            )
        if (
            not isinstance(self.upsample_factor, (int, np.integer))
            or self.upsample_factor < 1
            or self.size % self.upsample_factor
        ):
            raise InvalidConfigError(
                f"upsample_factor must be a positive integer dividing size, "
                f"got {self.upsample_factor!r}"
            )
        if not isinstance(self.seed, (int, np.integer)) or self.seed < 0:
            raise InvalidConfigError(f"seed must be a non-negative integer, got {self.seed!r}")
        object.__setattr__(self, "size", int(self.size))
        object.__setattr__(self, "upsample_factor", int(self.upsample_factor))
        object.__setattr__(self, "seed", int(self.seed))


def synth_config_to_dict(cfg: SynthConfig) -> dict:
    return {
        "size": cfg.size,
        "base_smoothness": cfg.base_smoothness,
        "artifact_amplitude": cfg.artifact_amplitude,
        "upsample_factor": cfg.upsample_factor,
        "seed": cfg.seed,
    }


def synth_config_from_dict(d: dict) -> SynthConfig:
    return SynthConfig(**{k: d[k] for k in synth_config_to_dict(SynthConfig()) if k in d})


def synth_real(cfg: SynthConfig, index: int) -> np.ndarray:
    """Smooth random field plus linear gradient, rescaled into [0.1, 0.9]."""
    rng = derive_rng(cfg.seed, _BASE_STREAM, index)
    size = cfg.size
    noise = rng.standard_normal((size, size, 3))
    magnitudes = rng.uniform(*_SLOPE_BAND, size=(2, 3))
    signs = rng.choice((-1.0, 1.0), size=(2, 3))
    field = gaussian_filter(noise, cfg.base_smoothness)
    field *= _NOISE_STD / np.maximum(field.std(axis=(0, 1)), 1e-12)
    coords = (np.arange(size) + 0.5) / size
    slopes = magnitudes * signs
    gradient = slopes[0] * coords[:, None, None] + slopes[1] * coords[None, :, None]
    raw = field + gradient
    lo = raw.min(axis=(0, 1), keepdims=True)
    hi = raw.max(axis=(0, 1), keepdims=True)
    return 0.1 + 0.8 * (raw - lo) / np.maximum(hi - lo, 1e-12)


def pool_upsample(img: np.ndarray, factor: int) -> np.ndarray:
    """Average-pool by `factor`, then replicate back to the input size."""
    img = require_image(img)
    if not isinstance(factor, (int, np.integer)) or factor < 1:
        raise InvalidInputError(f"factor must be a positive integer, got {factor!r}")
    h, w, c = img.shape
    if h % factor or w % factor:
        raise InvalidInputError(f"dims {h}x{w} are not multiples of factor {factor}")
    if factor == 1:
        return img.copy()
    pooled = img.reshape(h // factor, factor, w // factor, factor, c).mean(axis=(1, 3))
    return np.repeat(np.repeat(pooled, factor, axis=0), factor, axis=1)


def checkerboard(height: int, width: int, amplitude: float) -> np.ndarray:
    """A (H, W, 1) pixel-pitch +-amplitude checkerboard, +amplitude at (0, 0)."""
    ii, jj = np.indices((height, width))
    sign = 1.0 - 2.0 * ((ii + jj) % 2)
    return (amplitude * sign)[..., None]


def synth_fake(cfg: SynthConfig, index: int) -> np.ndarray:
    """A real-style base degraded by upsampling replicas and a checkerboard.

    With upsample_factor 1 and artifact_amplitude 0 this reduces exactly
    to ``synth_real(cfg, index)``.
    """
    base = synth_real(cfg, index)
    degraded = pool_upsample(base, cfg.upsample_factor)
    degraded = degraded + checkerboard(cfg.size, cfg.size, cfg.artifact_amplitude)
    return np.clip(degraded, 0.0, 1.0)


def mean_high_frequency_energy(img: np.ndarray, block_size: int = 8) -> float:
    """Mean luma DFT power over block frequencies with row or column >= half band.

    The fake generator's replicas and checkerboard concentrate energy in
    exactly this region, so the statistic separates the synthetic classes.
    """
    img = require_image(img, channels=3)
    luma = rgb_to_ycbcr(img)[..., 0]
    real, imag = blockwise_dft(luma, block_size)
    freqs = np.arange(block_size)
    high = (freqs[:, None] >= block_size // 2) | (freqs[None, :] >= block_size // 2)
    mask = np.tile(high, (luma.shape[0] // block_size, luma.shape[1] // block_size))
    power = np.square(real) + np.square(imag)
    return float(power[mask].mean())


# --- labeled datasets ---------------------------------------------------------


@dataclass(frozen=True)
class LabeledDataset:
    """Ordered (source, label) pairs; sources are paths or in-memory images."""

    items: tuple[tuple[Path | np.ndarray, int], ...]
    split: str = "train"
    skipped: tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        if self.split not in SPLITS:
            raise InvalidConfigError(f"split must be one of {SPLITS}, got {self.split!r}")
        for _, label in self.items:
            if label not in (REAL_LABEL, FAKE_LABEL):
                raise InvalidInputError(f"labels must be 0 (real) or 1 (fake), got {label!r}")
        object.__setattr__(self, "items", tuple(self.items))
        object.__setattr__(self, "skipped", tuple(self.skipped))

    def __len__(self) -> int:
        return len(self.items)

    @property
    def labels(self) -> np.ndarray:
        return np.array([label for _, label in self.items], dtype=np.int64)

    def label(self, i: int) -> int:
        return self.items[i][1]

    def image(self, i: int) -> np.ndarray:
        """The i-th sample as a float RGB image in [0, 1]."""
        source, _ = self.items[i]
        if isinstance(source, np.ndarray):
            return require_image(source, channels=3)
        return load_image(source)


def load_image(path: str | Path) -> np.ndarray:
    """Decode a PNG/JPEG file into a float64 (H, W, 3) image in [0, 1]."""
    path = Path(path)
    try:
        with Image.open(path) as img:
            arr = np.asarray(img.convert("RGB"), dtype=np.float64)
    except (OSError, ValueError, Image.DecompressionBombError) as exc:
        raise IngestionError(f"cannot decode image {path}: {exc}") from exc
    return arr / 255.0


def save_image_png(path: str | Path, img: np.ndarray) -> None:
    img = require_image(img, channels=3)
    as_u8 = np.clip(np.rint(img * 255.0), 0, 255).astype(np.uint8)
    Image.fromarray(as_u8, mode="RGB").save(Path(path), format="PNG")


def load_image_dir(root: str | Path, split: str = "test") -> LabeledDataset:
    """Scan `root/real` and `root/fake` into a dataset, real block first.

    Files are ordered lexicographically within each class. Undecodable
    image files are skipped with a warning and recorded on the dataset.
    """
    root = Path(root)
    items: list[tuple[Path, int]] = []
    skipped: list[str] = []
    for class_name, label in (("real", REAL_LABEL), ("fake", FAKE_LABEL)):
        class_dir = root / class_name
        if not class_dir.is_dir():
            raise IngestionError(f"missing class directory {class_dir}")
        for path in sorted(class_dir.iterdir()):
            if path.suffix.lower() not in _IMAGE_SUFFIXES or not path.is_file():
                continue
            try:
                with Image.open(path) as img:
                    img.verify()
            except Exception as exc:  # noqa: BLE001 - any decode failure means skip
                log.warning("skipping undecodable image %s: %s", path, exc)
                skipped.append(str(path))
                continue
            items.append((path, label))
    return LabeledDataset(items=tuple(items), split=split, skipped=tuple(skipped))


def resize_bilinear(img: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Bilinear resample with half-pixel-center coordinates and edge clamp."""
    img = require_image(img)
    h, w = img.shape[:2]
    if out_h < 1 or out_w < 1:
        raise InvalidInputError(f"target dims must be positive, got {out_h}x{out_w}")
    if (out_h, out_w) == (h, w):
        return img.copy()
    ys = (np.arange(out_h) + 0.5) * (h / out_h) - 0.5
    xs = (np.arange(out_w) + 0.5) * (w / out_w) - 0.5
    y0 = np.clip(np.floor(ys).astype(np.int64), 0, h - 1)
    x0 = np.clip(np.floor(xs).astype(np.int64), 0, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    ty = np.clip(ys - y0, 0.0, 1.0)[:, None, None]
    tx = np.clip(xs - x0, 0.0, 1.0)[None, :, None]
    top = img[y0[:, None], x0[None, :]] * (1 - tx) + img[y0[:, None], x1[None, :]] * tx
    bot = img[y1[:, None], x0[None, :]] * (1 - tx) + img[y1[:, None], x1[None, :]] * tx
    return top * (1 - ty) + bot * ty


def preprocess_crop_resize(img: np.ndarray, target: int) -> np.ndarray:
    """Center crop to the shorter edge, then bilinear resize to target square."""
    img = require_image(img, channels=3)
    if target < 1:
        raise InvalidInputError(f"target must be positive, got {target}")
    h, w = img.shape[:2]
    if h < 2 or w < 2:
        raise IngestionError(f"degenerate image of dims {h}x{w}")
    side = min(h, w)
    top = (h - side) // 2
    left = (w - side) // 2
    crop = img[top : top + side, left : left + side]
    return resize_bilinear(crop, target, target)


# --- corpus materialization ---------------------------------------------------


def synth_split(
    cfg: SynthConfig, n_per_class: int, split: str, start_index: int = 0
) -> tuple[LabeledDataset, int]:
    """In-memory balanced split; index ranges never overlap across calls."""
    if n_per_class < 0:
        raise InvalidConfigError(f"n_per_class must be >= 0, got {n_per_class}")
    items: list[tuple[np.ndarray, int]] = []
    for k in range(n_per_class):
        items.append((synth_real(cfg, start_index + k), REAL_LABEL))
    for k in range(n_per_class):
        items.append((synth_fake(cfg, start_index + n_per_class + k), FAKE_LABEL))
    return (
        LabeledDataset(items=tuple(items), split=split),
        start_index + 2 * n_per_class,
    )


def write_corpus(
    out_dir: str | Path, cfg: SynthConfig, n_train: int, n_val: int, n_test: int
) -> dict:
    """Write a full PNG corpus plus a manifest recording the generator config.

    Layout: <out>/<split>/<class>/<class>_<index>.png with globally
    disjoint generation indices, so no two files share pixel content.
    """
    out = Path(out_dir)
    counts = {"train": n_train, "val": n_val, "test": n_test}
    for split, n in counts.items():
        if n < 0:
            raise InvalidConfigError(f"negative count for split {split}: {n}")
    manifest: dict = {"config": synth_config_to_dict(cfg), "splits": {}}
    next_index = 0
    for split in SPLITS:
        n = counts[split]
        ranges = {}
        for class_name, generator in (("real", synth_real), ("fake", synth_fake)):
            class_dir = out / split / class_name
            class_dir.mkdir(parents=True, exist_ok=True)
            for k in range(n):
                idx = next_index + k
                save_image_png(class_dir / f"{class_name}_{idx:06d}.png", generator(cfg, idx))
            ranges[class_name] = [next_index, next_index + n]
            next_index += n
        manifest["splits"][split] = {"per_class": n, "index_ranges": ranges}
    (out / "manifest.json").write_text(dumps_json(manifest))
    return manifest
