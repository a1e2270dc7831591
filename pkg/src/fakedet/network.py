"""Compact residual classifier with exact analytic gradients.

A desk-scale stand-in for a large pretrained backbone: a 3x3 stem whose
input width adapts to the consumed stream (3 pixel channels, or 6/12/18
frequency channels), a few residual blocks of two 3x3 convolutions each
with stride 2 at width transitions, global average pooling, and an affine
head to 2 logits. No batch statistics anywhere, so rows of a batch are
fully independent and gradients can be validated against central finite
differences to tight tolerance.

Convolutions run as one matmul per kernel offset over strided slices of
the zero-padded input (channel-last layout, weights (Cout, Cin, kh, kw)).
The backward pass accumulates into the padded gradient through the same
slices, which is exact because slices of a fixed offset never overlap.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterator

import numpy as np

from .errors import InvalidConfigError, InvalidInputError
from .transforms import ChannelNormalizer, TransformConfig

DTYPES = {"float32": np.float32, "float64": np.float64}


@dataclass(frozen=True)
class NetworkSpec:
    """Topology description; parameter names and shapes derive from it."""

    input_channels: int = 3
    stem_width: int = 16
    block_widths: tuple[int, ...] = (16, 32, 64)

    def __post_init__(self) -> None:
        widths = tuple(int(w) for w in self.block_widths)
        if not widths:
            raise InvalidConfigError("block_widths must not be empty")
        for name, value in (
            ("input_channels", self.input_channels),
            ("stem_width", self.stem_width),
            *((f"block width {w}", w) for w in widths),
        ):
            if not isinstance(value, (int, np.integer)) or value < 1:
                raise InvalidConfigError(f"{name} must be a positive integer, got {value!r}")
        object.__setattr__(self, "input_channels", int(self.input_channels))
        object.__setattr__(self, "stem_width", int(self.stem_width))
        object.__setattr__(self, "block_widths", widths)

    def blocks(self) -> Iterator[tuple[str, int, int, int]]:
        """Yields (name, in_width, out_width, stride) per residual block."""
        prev = self.stem_width
        for i, width in enumerate(self.block_widths, start=1):
            stride = 1 if width == prev else 2
            yield f"block{i}", prev, width, stride
            prev = width

    @property
    def downsample_factor(self) -> int:
        factor = 1
        for _, _, _, stride in self.blocks():
            factor *= stride
        return factor


def spec_to_dict(spec: NetworkSpec) -> dict:
    return {
        "input_channels": spec.input_channels,
        "stem_width": spec.stem_width,
        "block_widths": list(spec.block_widths),
    }


def spec_from_dict(d: dict) -> NetworkSpec:
    return NetworkSpec(
        input_channels=d["input_channels"],
        stem_width=d["stem_width"],
        block_widths=tuple(d["block_widths"]),
    )


def param_shapes(spec: NetworkSpec) -> dict[str, tuple[int, ...]]:
    """Named tensor shapes in a fixed order (weights (Cout, Cin, kh, kw))."""
    shapes: dict[str, tuple[int, ...]] = {
        "stem.w": (spec.stem_width, spec.input_channels, 3, 3),
        "stem.b": (spec.stem_width,),
    }
    for name, cin, cout, stride in spec.blocks():
        shapes[f"{name}.conv1.w"] = (cout, cin, 3, 3)
        shapes[f"{name}.conv1.b"] = (cout,)
        shapes[f"{name}.conv2.w"] = (cout, cout, 3, 3)
        shapes[f"{name}.conv2.b"] = (cout,)
        if stride != 1 or cin != cout:
            shapes[f"{name}.proj.w"] = (cout, cin, 1, 1)
            shapes[f"{name}.proj.b"] = (cout,)
    shapes["head.w"] = (spec.block_widths[-1], 2)
    shapes["head.b"] = (2,)
    return shapes


@dataclass
class ModelParams:
    """Named tensors plus everything needed to reproduce the input pipeline."""

    spec: NetworkSpec
    tensors: dict[str, np.ndarray]
    normalizer: ChannelNormalizer | None = None
    transform_config: TransformConfig | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        expected = param_shapes(self.spec)
        if set(self.tensors) != set(expected):
            missing = sorted(set(expected) - set(self.tensors))
            extra = sorted(set(self.tensors) - set(expected))
            raise InvalidConfigError(f"tensor names mismatch: missing {missing}, extra {extra}")
        for name, shape in expected.items():
            if tuple(self.tensors[name].shape) != shape:
                raise InvalidConfigError(
                    f"tensor {name} has shape {self.tensors[name].shape}, expected {shape}"
                )

    def astype(self, dtype) -> "ModelParams":
        tensors = {k: np.ascontiguousarray(v, dtype=dtype) for k, v in self.tensors.items()}
        return replace(self, tensors=tensors, metadata=dict(self.metadata))

    def copy(self) -> "ModelParams":
        return replace(
            self,
            tensors={k: v.copy() for k, v in self.tensors.items()},
            metadata=dict(self.metadata),
        )


def init_params(spec: NetworkSpec, seed: int) -> ModelParams:
    """Fan-in-scaled uniform weights, zero biases, deterministic in seed."""
    rng = np.random.default_rng([int(seed)])
    tensors: dict[str, np.ndarray] = {}
    for name, shape in param_shapes(spec).items():
        if name.endswith(".b"):
            tensors[name] = np.zeros(shape, dtype=np.float64)
        else:
            fan_in = int(np.prod(shape[1:])) if len(shape) == 4 else shape[0]
            bound = 1.0 / np.sqrt(fan_in)
            tensors[name] = rng.uniform(-bound, bound, size=shape)
    return ModelParams(spec=spec, tensors=tensors)


# --- layers -------------------------------------------------------------------


def _out_dim(size: int, stride: int) -> int:
    return -(-size // stride)


def conv2d(x: np.ndarray, w: np.ndarray, b: np.ndarray, stride: int = 1) -> np.ndarray:
    """Same-padded 2-D convolution, one dgemm per kernel offset.

    x: (B, H, W, Cin), w: (Cout, Cin, kh, kw), b: (Cout,).
    """
    bsz, h, wd, cin = x.shape
    cout, w_cin, kh, kw = w.shape
    if w_cin != cin:
        raise InvalidInputError(f"conv expects {w_cin} input channels, got {cin}")
    ph, pw = kh // 2, kw // 2
    xp = np.pad(x, ((0, 0), (ph, ph), (pw, pw), (0, 0))) if ph or pw else x
    oh, ow = _out_dim(h, stride), _out_dim(wd, stride)
    # contiguous (kh, kw, cin, cout) so each offset's matrix hits the gemm fast path
    taps = np.ascontiguousarray(w.transpose(2, 3, 1, 0), dtype=x.dtype)
    acc = np.zeros((bsz * oh * ow, cout), dtype=x.dtype)
    for di in range(kh):
        for dj in range(kw):
            xs = xp[
                :,
                di : di + (oh - 1) * stride + 1 : stride,
                dj : dj + (ow - 1) * stride + 1 : stride,
                :,
            ]
            acc += xs.reshape(bsz * oh * ow, cin) @ taps[di, dj]
    return acc.reshape(bsz, oh, ow, cout) + b.astype(x.dtype, copy=False)


def conv2d_backward(
    g: np.ndarray, x: np.ndarray, w: np.ndarray, stride: int = 1
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gradients (dx, dw, db) of conv2d for upstream gradient g."""
    bsz, h, wd, cin = x.shape
    cout, _, kh, kw = w.shape
    _, oh, ow, _ = g.shape
    ph, pw = kh // 2, kw // 2
    xp = np.pad(x, ((0, 0), (ph, ph), (pw, pw), (0, 0))) if ph or pw else x
    gf = np.ascontiguousarray(g).reshape(bsz * oh * ow, cout)
    db = gf.sum(axis=0)
    dw = np.empty_like(w)
    dxp = np.zeros_like(xp)
    # contiguous (kh, kw, cout, cin) offset matrices for the gemm fast path
    taps = np.ascontiguousarray(w.transpose(2, 3, 0, 1), dtype=g.dtype)
    for di in range(kh):
        for dj in range(kw):
            rows = slice(di, di + (oh - 1) * stride + 1, stride)
            cols = slice(dj, dj + (ow - 1) * stride + 1, stride)
            xs = xp[:, rows, cols, :].reshape(bsz * oh * ow, cin)
            dw[:, :, di, dj] = gf.T @ xs
            dxp[:, rows, cols, :] += (gf @ taps[di, dj]).reshape(bsz, oh, ow, cin)
    dx = dxp[:, ph : ph + h, pw : pw + wd, :] if ph or pw else dxp
    return np.ascontiguousarray(dx), dw, db


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


# --- forward / backward -------------------------------------------------------


def _check_batch(spec: NetworkSpec, batch: np.ndarray) -> np.ndarray:
    batch = np.asarray(batch)
    if batch.ndim != 4:
        raise InvalidInputError(f"batch must be (B, H, W, C), got shape {batch.shape}")
    if batch.shape[3] != spec.input_channels:
        raise InvalidInputError(
            f"batch has {batch.shape[3]} channels, spec expects {spec.input_channels}"
        )
    factor = spec.downsample_factor
    if batch.shape[1] % factor or batch.shape[2] % factor:
        raise InvalidInputError(
            f"spatial dims {batch.shape[1]}x{batch.shape[2]} must be multiples of {factor}"
        )
    if not np.issubdtype(batch.dtype, np.floating):
        batch = batch.astype(np.float64)
    return batch


def _forward_cached(params: ModelParams, batch: np.ndarray) -> tuple[np.ndarray, list]:
    t = params.tensors
    x = _check_batch(params.spec, batch)
    caches: list = []

    stem_pre = conv2d(x, t["stem.w"], t["stem.b"])
    out = relu(stem_pre)
    caches.append(("stem", x, stem_pre))

    for name, cin, cout, stride in params.spec.blocks():
        block_in = out
        pre1 = conv2d(block_in, t[f"{name}.conv1.w"], t[f"{name}.conv1.b"], stride)
        act1 = relu(pre1)
        pre2 = conv2d(act1, t[f"{name}.conv2.w"], t[f"{name}.conv2.b"])
        if f"{name}.proj.w" in t:
            skip = conv2d(block_in, t[f"{name}.proj.w"], t[f"{name}.proj.b"], stride)
        else:
            skip = block_in
        pre_out = pre2 + skip
        out = relu(pre_out)
        caches.append((name, block_in, pre1, act1, pre_out, stride))

    pooled = out.mean(axis=(1, 2))
    logits = pooled @ t["head.w"].astype(out.dtype, copy=False) + t["head.b"].astype(
        out.dtype, copy=False
    )
    caches.append(("head", out, pooled))
    return logits, caches


def forward(params: ModelParams, batch: np.ndarray) -> np.ndarray:
    """Logits of shape (B, 2); rows depend only on their own sample."""
    logits, _ = _forward_cached(params, batch)
    return logits


def min_preactivation_margin(params: ModelParams, batch: np.ndarray) -> float:
    """Smallest |value| feeding any rectifier during this forward pass.

    The objective is only piecewise smooth; central finite differences are
    trustworthy when every rectifier input sits further from zero than the
    probe step can move it. Validation points should keep this margin a few
    orders of magnitude above the step size.
    """
    _, caches = _forward_cached(params, batch)
    margin = np.inf
    for cache in caches:
        if cache[0] == "stem":
            margin = min(margin, float(np.abs(cache[2]).min()))
        elif cache[0] != "head":
            _, _, pre1, _, pre_out, _ = cache
            margin = min(margin, float(np.abs(pre1).min()), float(np.abs(pre_out).min()))
    return margin


def _backward(
    params: ModelParams, caches: list, dlogits: np.ndarray
) -> dict[str, np.ndarray]:
    t = params.tensors
    grads: dict[str, np.ndarray] = {}

    head_name, head_in, pooled = caches[-1]
    assert head_name == "head"
    grads["head.w"] = pooled.T @ dlogits
    grads["head.b"] = dlogits.sum(axis=0)
    dpooled = dlogits @ t["head.w"].T.astype(dlogits.dtype, copy=False)
    _, fh, fw, _ = head_in.shape
    dout = np.broadcast_to(
        dpooled[:, None, None, :] / (fh * fw), head_in.shape
    ).astype(dlogits.dtype, copy=False)

    block_specs = list(params.spec.blocks())
    for cache, (name, cin, cout, stride) in zip(reversed(caches[1:-1]), reversed(block_specs)):
        cname, block_in, pre1, act1, pre_out, cstride = cache
        assert cname == name and cstride == stride
        dpre_out = dout * (pre_out > 0)
        dact1, dw2, db2 = conv2d_backward(dpre_out, act1, t[f"{name}.conv2.w"])
        grads[f"{name}.conv2.w"] = dw2
        grads[f"{name}.conv2.b"] = db2
        dpre1 = dact1 * (pre1 > 0)
        dblock_in, dw1, db1 = conv2d_backward(dpre1, block_in, t[f"{name}.conv1.w"], stride)
        grads[f"{name}.conv1.w"] = dw1
        grads[f"{name}.conv1.b"] = db1
        if f"{name}.proj.w" in t:
            dskip_in, dwp, dbp = conv2d_backward(
                dpre_out, block_in, t[f"{name}.proj.w"], stride
            )
            grads[f"{name}.proj.w"] = dwp
            grads[f"{name}.proj.b"] = dbp
            dblock_in = dblock_in + dskip_in
        else:
            dblock_in = dblock_in + dpre_out
        dout = dblock_in

    _, stem_in, stem_pre = caches[0]
    dstem_pre = dout * (stem_pre > 0)
    _, dws, dbs = conv2d_backward(dstem_pre, stem_in, t["stem.w"])
    grads["stem.w"] = dws
    grads["stem.b"] = dbs
    return grads


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=-1, keepdims=True)


def loss_and_grad(
    params: ModelParams,
    batch: np.ndarray,
    labels: np.ndarray,
    weight_decay: float = 0.0,
) -> tuple[float, dict[str, np.ndarray]]:
    """Mean softmax cross-entropy plus (wd/2) sum of squared weights.

    The L2 term covers convolution and affine weights, never biases.
    Returned gradients are the exact analytic gradients of this objective.
    """
    labels = np.asarray(labels)
    if labels.ndim != 1 or not np.isin(labels, (0, 1)).all():
        raise InvalidInputError("labels must be a 1-D array over {0, 1}")
    if labels.shape[0] != np.asarray(batch).shape[0]:
        raise InvalidInputError(
            f"{labels.shape[0]} labels for a batch of {np.asarray(batch).shape[0]}"
        )
    logits, caches = _forward_cached(params, batch)
    n = labels.shape[0]
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_z = np.log(np.exp(shifted).sum(axis=1))
    ce = float((log_z - shifted[np.arange(n), labels]).mean())

    dlogits = softmax(logits)
    dlogits[np.arange(n), labels] -= 1.0
    dlogits /= n
    grads = _backward(params, caches, dlogits)

    loss = ce
    if weight_decay:
        reg = 0.0
        for name, tensor in params.tensors.items():
            if name.endswith(".w"):
                reg += float(np.square(tensor).sum())
                grads[name] = grads[name] + weight_decay * tensor
        loss = ce + 0.5 * weight_decay * reg
    return loss, grads


def predict_proba(params: ModelParams, batch: np.ndarray) -> np.ndarray:
    """(B, 2) class probabilities, columns (p_real, p_fake); accepts one
    (H, W, C) sample or a full batch."""
    batch = np.asarray(batch)
    single = batch.ndim == 3
    if single:
        batch = batch[None]
    # probabilities are always 64-bit so simplex identities hold to ~1e-16
    # even for models trained in the 32-bit throughput mode
    probs = softmax(forward(params, batch).astype(np.float64))
    return probs[0] if single else probs


# --- optimizer ----------------------------------------------------------------


@dataclass(frozen=True)
class TrainConfig:
    """Optimizer and schedule settings (Adam throughout)."""

    learning_rate: float = 1e-4
    weight_decay: float = 5e-4
    batch_size: int = 24
    epochs: int = 24
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    seed: int = 0
    dtype: str = "float64"

    def __post_init__(self) -> None:
        if not self.learning_rate > 0:
            raise InvalidConfigError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.weight_decay < 0:
            raise InvalidConfigError(f"weight_decay must be >= 0, got {self.weight_decay}")
        if not isinstance(self.batch_size, (int, np.integer)) or self.batch_size < 1:
            raise InvalidConfigError(f"batch_size must be >= 1, got {self.batch_size!r}")
        if not isinstance(self.epochs, (int, np.integer)) or self.epochs < 0:
            raise InvalidConfigError(f"epochs must be >= 0, got {self.epochs!r}")
        for name in ("adam_beta1", "adam_beta2"):
            beta = getattr(self, name)
            if not 0.0 <= beta < 1.0:
                raise InvalidConfigError(f"{name} must be in [0, 1), got {beta}")
        if not self.adam_eps > 0:
            raise InvalidConfigError(f"adam_eps must be positive, got {self.adam_eps}")
        if not isinstance(self.seed, (int, np.integer)) or self.seed < 0:
            raise InvalidConfigError(f"seed must be a non-negative integer, got {self.seed!r}")
        if self.dtype not in DTYPES:
            raise InvalidConfigError(f"dtype must be one of {sorted(DTYPES)}, got {self.dtype!r}")
        object.__setattr__(self, "batch_size", int(self.batch_size))
        object.__setattr__(self, "epochs", int(self.epochs))
        object.__setattr__(self, "seed", int(self.seed))


def train_config_to_dict(cfg: TrainConfig) -> dict:
    return {
        "learning_rate": cfg.learning_rate,
        "weight_decay": cfg.weight_decay,
        "batch_size": cfg.batch_size,
        "epochs": cfg.epochs,
        "adam_beta1": cfg.adam_beta1,
        "adam_beta2": cfg.adam_beta2,
        "adam_eps": cfg.adam_eps,
        "seed": cfg.seed,
        "dtype": cfg.dtype,
    }


def train_config_from_dict(d: dict) -> TrainConfig:
    return TrainConfig(**{k: d[k] for k in train_config_to_dict(TrainConfig()) if k in d})


@dataclass
class AdamState:
    """First/second moment accumulators plus the bias-correction step count."""

    step: int
    m: dict[str, np.ndarray]
    v: dict[str, np.ndarray]


def init_adam_state(params: ModelParams) -> AdamState:
    return AdamState(
        step=0,
        m={k: np.zeros_like(v) for k, v in params.tensors.items()},
        v={k: np.zeros_like(v) for k, v in params.tensors.items()},
    )


def adam_step(
    params: ModelParams,
    grads: dict[str, np.ndarray],
    state: AdamState,
    cfg: TrainConfig,
) -> tuple[ModelParams, AdamState]:
    """One bias-corrected Adam update; inputs are left untouched."""
    b1, b2, eps, lr = cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps, cfg.learning_rate
    t = state.step + 1
    corr1 = 1.0 - b1**t
    corr2 = 1.0 - b2**t
    new_tensors: dict[str, np.ndarray] = {}
    new_m: dict[str, np.ndarray] = {}
    new_v: dict[str, np.ndarray] = {}
    for name, w in params.tensors.items():
        g = grads[name]
        m = b1 * state.m[name] + (1.0 - b1) * g
        v = b2 * state.v[name] + (1.0 - b2) * np.square(g)
        update = lr * (m / corr1) / (np.sqrt(v / corr2) + eps)
        new_tensors[name] = w - update.astype(w.dtype, copy=False)
        new_m[name] = m
        new_v[name] = v
    new_params = replace(params, tensors=new_tensors, metadata=dict(params.metadata))
    return new_params, AdamState(step=t, m=new_m, v=new_v)
