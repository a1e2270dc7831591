"""RGB <-> YCbCr conversion with configurable luma weights.

Images are channel-last float arrays with pixel values in [0, 1]. Chroma is
stored zero-centered: Cb is the scaled blue difference (B - Y) / (2 (1 - k_by))
and Cr the scaled red difference (R - Y) / (2 (1 - k_ry)), which for the
BT.601 weights is the usual (B - Y) / 1.772 and (R - Y) / 1.402. A literal
unscaled variant with the difference channels swapped (Cb = R - Y,
Cr = B - Y) is kept behind ``chroma_swap`` for comparison runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._validate import require_image
from .errors import InvalidConfigError


@dataclass(frozen=True)
class ColorCoefficients:
    """Luma weights of an RGB -> YCbCr conversion.

    Only the red and blue weights are stored; the green weight is derived
    from the sum-to-one constraint, so k_ry + k_gy + k_by == 1 holds by
    construction.
    """

    k_ry: float
    k_by: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.k_ry) and math.isfinite(self.k_by)):
            raise InvalidConfigError("luma weights must be finite")
        if self.k_ry <= 0.0 or self.k_by <= 0.0:
            raise InvalidConfigError("luma weights must be strictly positive")
        if self.k_ry + self.k_by >= 1.0:
            raise InvalidConfigError(
                "k_ry + k_by must be < 1 so the derived green weight stays positive"
            )

    @property
    def k_gy(self) -> float:
        return 1.0 - self.k_ry - self.k_by


#: BT.601 weights (the library default).
ITU601 = ColorCoefficients(k_ry=0.299, k_by=0.114)


def rgb_to_ycbcr(
    img: np.ndarray,
    coeffs: ColorCoefficients = ITU601,
    *,
    chroma_swap: bool = False,
) -> np.ndarray:
    """Convert an (H, W, 3) RGB image in [0, 1] to zero-centered YCbCr.

    Chroma is computed from channel differences, so any gray pixel
    (R == G == B) maps to exactly zero chroma. With ``chroma_swap`` the
    unscaled swapped form is produced instead: Cb = R - Y, Cr = B - Y.
    """
    img = require_image(img, channels=3)
    r, g, b = img[..., 0], img[..., 1], img[..., 2]
    kr, kg, kb = coeffs.k_ry, coeffs.k_gy, coeffs.k_by
    y = kr * r + kg * g + kb * b
    # b - y == kr (b - r) + kg (b - g) and r - y == kg (r - g) + kb (r - b)
    # under the sum-to-one constraint; the difference form is exact on grays.
    bd = kr * (b - r) + kg * (b - g)
    rd = kg * (r - g) + kb * (r - b)
    if chroma_swap:
        cb, cr = rd, bd
    else:
        cb = bd / (2.0 * (1.0 - kb))
        cr = rd / (2.0 * (1.0 - kr))
    return np.stack([y, cb, cr], axis=-1)


def ycbcr_to_rgb(
    img: np.ndarray,
    coeffs: ColorCoefficients = ITU601,
    *,
    chroma_swap: bool = False,
) -> np.ndarray:
    """Invert :func:`rgb_to_ycbcr`; the result is clamped to [0, 1].

    ``chroma_swap`` must match the flag used in the forward conversion.
    """
    img = require_image(img, channels=3)
    y, cb, cr = img[..., 0], img[..., 1], img[..., 2]
    kr, kg, kb = coeffs.k_ry, coeffs.k_gy, coeffs.k_by
    if chroma_swap:
        r = y + cb
        b = y + cr
    else:
        r = y + cr * (2.0 * (1.0 - kr))
        b = y + cb * (2.0 * (1.0 - kb))
    g = (y - kr * r - kb * b) / kg
    return np.clip(np.stack([r, g, b], axis=-1), 0.0, 1.0)
