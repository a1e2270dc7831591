"""Small argument-checking helpers used across modules."""

from __future__ import annotations

import numpy as np

from .errors import InvalidInputError


def require_image(arr, channels: int | None = None, name: str = "img") -> np.ndarray:
    """Check that ``arr`` is a channel-last (H, W, C) float image and return it.

    ``channels`` pins the channel count when given. Raises InvalidInputError
    on any violation; does not copy.
    """
    arr = np.asarray(arr)
    if arr.ndim != 3:
        raise InvalidInputError(f"{name} must be a (H, W, C) array, got shape {arr.shape}")
    if channels is not None and arr.shape[2] != channels:
        raise InvalidInputError(
            f"{name} must have {channels} channels, got {arr.shape[2]}"
        )
    if not np.issubdtype(arr.dtype, np.floating):
        arr = arr.astype(np.float64)
    return arr


def require_channel(arr, name: str = "channel") -> np.ndarray:
    """Check that ``arr`` is a single (H, W) plane and return it as float."""
    arr = np.asarray(arr)
    if arr.ndim != 2:
        raise InvalidInputError(f"{name} must be a (H, W) array, got shape {arr.shape}")
    if not np.issubdtype(arr.dtype, np.floating):
        arr = arr.astype(np.float64)
    return arr
