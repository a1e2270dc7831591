"""Single-stream training loop with deterministic shuffling and augmentation.

Each stream is trained individually: the spatial stream on augmented RGB
pixels, the frequency stream on normalized frequency cubes of the same
augmented pixels. The per-channel normalizer is fitted once on the clean
training cubes before any updates and travels with the model. After every
epoch the clean validation accuracy is measured and the best-epoch
parameters are what the function returns.

Reproducibility: the shuffle order is a pure function of (seed, epoch),
and each sample's augmentation generator is derived from
(augment seed, epoch, dataset index), so results do not depend on batch
boundaries being processed in any particular interleaving.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .augment import AugmentConfig, augment, derive_rng
from .corpus import LabeledDataset
from .errors import TrainingError
from .features import STREAMS, input_channels_for, stream_features
from .network import (
    DTYPES,
    ModelParams,
    NetworkSpec,
    TrainConfig,
    adam_step,
    forward,
    init_adam_state,
    init_params,
    loss_and_grad,
    train_config_to_dict,
)
from .transforms import assemble_frequency_cube, config_to_dict, fit_channel_normalizer

#: Keys separating the shuffle stream from per-sample augmentation streams,
#: so the two never collide even when both configs share one seed.
_SHUFFLE_STREAM = 0x5B
_AUGMENT_STREAM = 0xA6


def _map_maybe_parallel(fn, items, workers: int) -> list:
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def predict_logits(params: ModelParams, feats: np.ndarray, batch_size: int = 64) -> np.ndarray:
    """Forward pass over a feature stack in fixed-size chunks."""
    chunks = [
        forward(params, feats[start : start + batch_size])
        for start in range(0, feats.shape[0], batch_size)
    ]
    return np.concatenate(chunks, axis=0)


def _accuracy(params: ModelParams, feats: np.ndarray, labels: np.ndarray) -> float:
    pred = predict_logits(params, feats).argmax(axis=1)
    return float((pred == labels).mean())


def train_stream(
    kind: str,
    train: LabeledDataset,
    val: LabeledDataset,
    tcfg: TrainConfig,
    xcfg,
    acfg: AugmentConfig,
    workers: int = 1,
) -> ModelParams:
    """Train one stream and return the best-validation-epoch parameters."""
    if kind not in STREAMS:
        raise TrainingError(f"stream kind must be one of {STREAMS}, got {kind!r}")
    if len(train) == 0 or len(val) == 0:
        raise TrainingError("train and val datasets must be non-empty")

    dtype = DTYPES[tcfg.dtype]
    train_imgs = [train.image(i) for i in range(len(train))]
    val_imgs = [val.image(i) for i in range(len(val))]
    shapes = {img.shape for img in train_imgs + val_imgs}
    if len(shapes) != 1:
        raise TrainingError(f"images must share one shape, found {sorted(shapes)}")

    normalizer = None
    if kind == "frequency":
        normalizer = fit_channel_normalizer(
            assemble_frequency_cube(img, xcfg) for img in train_imgs
        )

    def featurize(img: np.ndarray) -> np.ndarray:
        return stream_features(kind, img, xcfg, normalizer).astype(dtype, copy=False)

    spec = NetworkSpec(input_channels=input_channels_for(kind, xcfg))
    params = init_params(spec, tcfg.seed).astype(dtype)
    params.normalizer = normalizer
    params.transform_config = xcfg
    state = init_adam_state(params)

    val_feats = np.stack(_map_maybe_parallel(featurize, val_imgs, workers))
    val_labels = val.labels
    train_labels = train.labels

    history: list[dict] = []
    best_acc = _accuracy(params, val_feats, val_labels)
    best_epoch = 0
    best_tensors = {k: v.copy() for k, v in params.tensors.items()}
    history.append({"epoch": 0, "train_loss": None, "val_accuracy": best_acc})

    n = len(train_imgs)
    for epoch in range(1, tcfg.epochs + 1):
        order = derive_rng(tcfg.seed, _SHUFFLE_STREAM, epoch).permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, tcfg.batch_size):
            idx = order[start : start + tcfg.batch_size]

            def sample_features(i: int) -> np.ndarray:
                rng = derive_rng(acfg.seed, _AUGMENT_STREAM, epoch, int(i))
                return featurize(augment(train_imgs[i], acfg, rng))

            batch = np.stack(_map_maybe_parallel(sample_features, list(idx), workers))
            loss, grads = loss_and_grad(params, batch, train_labels[idx], tcfg.weight_decay)
            params, state = adam_step(params, grads, state, tcfg)
            epoch_loss += loss * len(idx)
        val_acc = _accuracy(params, val_feats, val_labels)
        history.append(
            {"epoch": epoch, "train_loss": float(epoch_loss / n), "val_accuracy": val_acc}
        )
        if val_acc > best_acc:
            best_acc = val_acc
            best_epoch = epoch
            best_tensors = {k: v.copy() for k, v in params.tensors.items()}

    params.tensors = best_tensors
    params.metadata = {
        "stream": kind,
        "train_config": train_config_to_dict(tcfg),
        "augment_config": {
            "probability": acfg.probability,
            "blur_sigma_range": list(acfg.blur_sigma_range),
            "jpeg_quality_range": list(acfg.jpeg_quality_range),
            "seed": acfg.seed,
        },
        "transform_config": config_to_dict(xcfg),
        "history": history,
        "best_epoch": best_epoch,
        "best_val_accuracy": best_acc,
    }
    return params
