"""Per-stream input construction.

The spatial stream consumes the pixel image as-is; the frequency stream
consumes the (optionally normalized) frequency cube of the same pixels.
Both return channel-last float arrays ready for the network.
"""

from __future__ import annotations

import numpy as np

from ._validate import require_image
from .errors import InvalidConfigError
from .transforms import (
    ChannelNormalizer,
    TransformConfig,
    apply_normalizer,
    assemble_frequency_cube,
)

STREAMS = ("spatial", "frequency")


def input_channels_for(kind: str, config: TransformConfig) -> int:
    if kind == "spatial":
        return 3
    if kind == "frequency":
        return config.channel_count
    raise InvalidConfigError(f"stream kind must be one of {STREAMS}, got {kind!r}")


def stream_features(
    kind: str,
    img: np.ndarray,
    config: TransformConfig,
    normalizer: ChannelNormalizer | None = None,
) -> np.ndarray:
    """The network input for one pixel image under the given stream kind."""
    if kind == "spatial":
        return require_image(img, channels=3)
    if kind == "frequency":
        cube = assemble_frequency_cube(img, config)
        if normalizer is not None:
            cube = apply_normalizer(cube, normalizer)
        return cube.data
    raise InvalidConfigError(f"stream kind must be one of {STREAMS}, got {kind!r}")
