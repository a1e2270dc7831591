"""Pixel-domain perturbations: Gaussian blur and JPEG round-trip.

These serve double duty. During training each perturbation fires
independently with a configured probability (default 10%) on the pixel
image before any frequency transform. The robustness sweep reuses the
same primitives at fixed parameter grids on test images.

All randomness comes from explicit generators. Per-sample generators are
derived from integer key tuples (seed, epoch, index), so augmentation is
reproducible and independent of iteration order.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from PIL import Image

from ._validate import require_image
from .errors import AugmentationError, InvalidConfigError, InvalidInputError

#: Below this the kernel degenerates to (almost) a single tap.
MIN_BLUR_SIGMA = 0.1


def derive_rng(*keys: int) -> np.random.Generator:
    """Generator keyed by a tuple of non-negative integers.

    Distinct key tuples give statistically independent streams, so
    per-sample states can be derived from (seed, epoch, index) and used
    in any order, including from parallel workers.
    """
    return np.random.default_rng(list(keys))


def gaussian_kernel(sigma: float) -> np.ndarray:
    """Normalized 1-D Gaussian taps with radius ceil(3 sigma)."""
    if not np.isfinite(sigma) or sigma < MIN_BLUR_SIGMA:
        raise InvalidInputError(f"blur sigma must be >= {MIN_BLUR_SIGMA}, got {sigma}")
    radius = math.ceil(3.0 * float(sigma))
    taps = np.exp(-0.5 * np.square(np.arange(-radius, radius + 1) / float(sigma)))
    return taps / taps.sum()


def _convolve_rows(arr: np.ndarray, taps: np.ndarray) -> np.ndarray:
    # Reflect-style boundary: the edge sample is repeated, i.e. pad of
    # [a b c] is [b a | a b c | c b]. With a symmetric normalized kernel
    # this extension keeps the array mean exactly (every length-2H window
    # of the reflected signal sums to twice the signal sum).
    radius = taps.size // 2
    pad = [(radius, radius)] + [(0, 0)] * (arr.ndim - 1)
    padded = np.pad(arr, pad, mode="symmetric")
    out = np.zeros(arr.shape, dtype=np.float64)
    for t, w in enumerate(taps):
        out += w * padded[t : t + arr.shape[0]]
    return out


def gaussian_filter(arr: np.ndarray, sigma: float) -> np.ndarray:
    """Separable Gaussian smoothing of an (H, W, C) array, any value range."""
    arr = require_image(arr)
    taps = gaussian_kernel(sigma)
    out = _convolve_rows(arr, taps)
    return _convolve_rows(out.swapaxes(0, 1), taps).swapaxes(0, 1)


def gaussian_blur(img: np.ndarray, sigma: float) -> np.ndarray:
    """Gaussian blur of a pixel-domain image, clamped back to [0, 1]."""
    return np.clip(gaussian_filter(img, sigma), 0.0, 1.0)


def jpeg_roundtrip(img: np.ndarray, quality: int) -> np.ndarray:
    """Encode a [0,1] RGB image as baseline JPEG and decode it back.

    Quantization to 8 bits happens at the codec boundary; dims are
    unchanged. Bit-exact output across codec builds is not promised.
    """
    img = require_image(img, channels=3)
    q = int(quality)
    if q != quality or not 1 <= q <= 100:
        raise InvalidInputError(
            f"JPEG quality must be an integer in [1, 100], got {quality!r}"
        )
    as_u8 = np.clip(np.rint(img * 255.0), 0, 255).astype(np.uint8)
    buf = io.BytesIO()
    try:
        Image.fromarray(as_u8, mode="RGB").save(buf, format="JPEG", quality=q)
        buf.seek(0)
        with Image.open(buf) as decoded:
            out = np.asarray(decoded.convert("RGB"), dtype=np.float64) / 255.0
    except (OSError, ValueError) as exc:
        raise AugmentationError(f"JPEG codec failure: {exc}") from exc
    if out.shape != img.shape:
        raise AugmentationError(
            f"JPEG round trip changed shape {img.shape} -> {out.shape}"
        )
    return out


@dataclass(frozen=True)
class AugmentConfig:
    """Training-time perturbation settings.

    Each perturbation fires independently with `probability`. Parameter
    ranges are artifact defaults, both config- and flag-overridable.
    """

    probability: float = 0.1
    blur_sigma_range: tuple[float, float] = (0.5, 3.0)
    jpeg_quality_range: tuple[int, int] = (70, 95)
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 <= self.probability <= 1.0:
            raise InvalidConfigError(
                f"probability must be in [0, 1], got {self.probability}"
            )
        lo, hi = (float(v) for v in self.blur_sigma_range)
        if not (MIN_BLUR_SIGMA <= lo <= hi) or not np.isfinite(hi):
            raise InvalidConfigError(
                f"blur sigma range must satisfy {MIN_BLUR_SIGMA} <= lo <= hi, "
                f"got {self.blur_sigma_range}"
            )
        qlo, qhi = self.jpeg_quality_range
        if int(qlo) != qlo or int(qhi) != qhi or not 1 <= qlo <= qhi <= 100:
            raise InvalidConfigError(
                f"JPEG quality range must be integers with 1 <= lo <= hi <= 100, "
                f"got {self.jpeg_quality_range}"
            )
        if not isinstance(self.seed, (int, np.integer)) or self.seed < 0:
            raise InvalidConfigError(f"seed must be a non-negative integer, got {self.seed!r}")
        object.__setattr__(self, "blur_sigma_range", (lo, hi))
        object.__setattr__(self, "jpeg_quality_range", (int(qlo), int(qhi)))
        object.__setattr__(self, "seed", int(self.seed))


class AugmentPlan(NamedTuple):
    """One sample's drawn perturbation decisions and parameters."""

    apply_blur: bool
    sigma: float
    apply_jpeg: bool
    quality: int


def draw_augment_plan(cfg: AugmentConfig, rng: np.random.Generator) -> AugmentPlan:
    """Draw decisions and parameters in a fixed order.

    All four values are always drawn, so the consumed stream length does
    not depend on the outcomes.
    """
    u_blur = rng.random()
    sigma = float(rng.uniform(*cfg.blur_sigma_range))
    u_jpeg = rng.random()
    qlo, qhi = cfg.jpeg_quality_range
    quality = int(rng.integers(qlo, qhi + 1))
    return AugmentPlan(
        apply_blur=bool(u_blur < cfg.probability),
        sigma=sigma,
        apply_jpeg=bool(u_jpeg < cfg.probability),
        quality=quality,
    )


def apply_augment_plan(img: np.ndarray, plan: AugmentPlan) -> np.ndarray:
    img = require_image(img, channels=3)
    out = img
    if plan.apply_blur:
        out = gaussian_blur(out, plan.sigma)
    if plan.apply_jpeg:
        out = jpeg_roundtrip(out, plan.quality)
    return out


def augment(img: np.ndarray, cfg: AugmentConfig, rng: np.random.Generator) -> np.ndarray:
    """Randomly perturbed copy of a pixel image (identity when nothing fires)."""
    return apply_augment_plan(img, draw_augment_plan(cfg, rng))
