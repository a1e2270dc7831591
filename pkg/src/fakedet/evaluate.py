"""Fusion, classification metrics, and the robustness sweep protocol.

The two streams are combined by class-probability averaging with fixed
equal weights. Metrics are accuracy and per-class F1 over the binary
real/fake task, with explicit degenerate flags where a precision or
recall denominator is zero. The robustness sweep re-evaluates fixed
models on test images perturbed by a blur-sigma grid and a JPEG-quality
grid; training data and model parameters are never touched.
"""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .augment import gaussian_blur, jpeg_roundtrip
from .corpus import FAKE_LABEL, REAL_LABEL, LabeledDataset
from .errors import EvaluationError, InvalidConfigError, InvalidInputError
from .features import stream_features
from .network import ModelParams, softmax
from .train import predict_logits

DEFAULT_THRESHOLD = 0.5

CSV_FIELDS = (
    "perturbation_kind",
    "perturbation_value",
    "model",
    "accuracy",
    "f1_fake",
    "f1_real",
    "n",
)


@dataclass(frozen=True)
class MetricsReport:
    """Binary classification metrics; confusion rows are true, columns predicted."""

    accuracy: float
    f1_fake: float
    f1_real: float
    confusion: np.ndarray
    n: int
    degenerate_fake: bool = False
    degenerate_real: bool = False

    def __post_init__(self) -> None:
        confusion = np.asarray(self.confusion, dtype=np.int64)
        if confusion.shape != (2, 2):
            raise InvalidInputError(f"confusion must be 2x2, got {confusion.shape}")
        if int(confusion.sum()) != self.n:
            raise InvalidInputError(
                f"confusion sums to {int(confusion.sum())}, expected n={self.n}"
            )
        object.__setattr__(self, "confusion", confusion)


def _f1_for_class(confusion: np.ndarray, cls: int) -> tuple[float, bool]:
    tp = int(confusion[cls, cls])
    fp = int(confusion[1 - cls, cls])
    fn = int(confusion[cls, 1 - cls])
    degenerate = (tp + fp == 0) or (tp + fn == 0)
    denom = 2 * tp + fp + fn
    return (0.0 if denom == 0 else 2.0 * tp / denom), degenerate


def metrics_from_predictions(y_true: np.ndarray, y_pred: np.ndarray) -> MetricsReport:
    """Accuracy, per-class F1, and the confusion table of a prediction set."""
    y_true = np.asarray(y_true, dtype=np.int64).reshape(-1)
    y_pred = np.asarray(y_pred, dtype=np.int64).reshape(-1)
    if y_true.shape != y_pred.shape:
        raise InvalidInputError(
            f"{y_true.shape[0]} labels vs {y_pred.shape[0]} predictions"
        )
    if y_true.size == 0:
        raise EvaluationError("cannot compute metrics on an empty prediction set")
    for arr, name in ((y_true, "labels"), (y_pred, "predictions")):
        if not np.isin(arr, (REAL_LABEL, FAKE_LABEL)).all():
            raise InvalidInputError(f"{name} must lie in {{0, 1}}")
    n = y_true.size
    confusion = np.zeros((2, 2), dtype=np.int64)
    np.add.at(confusion, (y_true, y_pred), 1)
    f1_fake, degenerate_fake = _f1_for_class(confusion, FAKE_LABEL)
    f1_real, degenerate_real = _f1_for_class(confusion, REAL_LABEL)
    return MetricsReport(
        accuracy=float(np.trace(confusion) / n),
        f1_fake=f1_fake,
        f1_real=f1_real,
        confusion=confusion,
        n=n,
        degenerate_fake=degenerate_fake,
        degenerate_real=degenerate_real,
    )


def _check_simplex(p: np.ndarray, name: str) -> np.ndarray:
    p = np.asarray(p, dtype=np.float64)
    if p.shape[-1] != 2:
        raise InvalidInputError(f"{name} must have 2 class columns, got shape {p.shape}")
    if np.any(p < -1e-9) or np.any(p > 1.0 + 1e-9):
        raise InvalidInputError(f"{name} entries must lie in [0, 1]")
    if np.any(np.abs(p.sum(axis=-1) - 1.0) > 1e-9):
        raise InvalidInputError(f"{name} rows must sum to 1 within 1e-9")
    return p


def fuse_probabilities(p_a: np.ndarray, p_b: np.ndarray) -> np.ndarray:
    """Equal-weight arithmetic mean of two class-probability vectors."""
    p_a = _check_simplex(p_a, "p_a")
    p_b = _check_simplex(p_b, "p_b")
    if p_a.shape != p_b.shape:
        raise InvalidInputError(f"shape mismatch {p_a.shape} vs {p_b.shape}")
    return 0.5 * (p_a + p_b)


def _model_name(params: ModelParams, fallback: str) -> str:
    return str(params.metadata.get("stream", fallback))


def dataset_probabilities(
    params: ModelParams,
    images: Sequence[np.ndarray],
    workers: int = 1,
) -> np.ndarray:
    """(n, 2) class probabilities of a fixed image list under one model."""
    dtype = params.tensors["head.b"].dtype

    def featurize(img: np.ndarray) -> np.ndarray:
        return stream_features(
            params.metadata.get("stream", "spatial"),
            img,
            params.transform_config,
            params.normalizer,
        ).astype(dtype, copy=False)

    if workers > 1 and len(images) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            feats = np.stack(list(pool.map(featurize, images)))
    else:
        feats = np.stack([featurize(img) for img in images])
    return softmax(predict_logits(params, feats).astype(np.float64))


def _resolve_models(models) -> list[ModelParams]:
    if isinstance(models, ModelParams):
        models = [models]
    models = list(models)
    if not 1 <= len(models) <= 2:
        raise EvaluationError(f"expected one or two models, got {len(models)}")
    return models


def evaluate_images(
    models,
    images: Sequence[np.ndarray],
    labels: np.ndarray,
    threshold: float = DEFAULT_THRESHOLD,
    workers: int = 1,
) -> MetricsReport:
    models = _resolve_models(models)
    if len(images) == 0:
        raise EvaluationError("cannot evaluate an empty dataset")
    probs = [dataset_probabilities(m, images, workers=workers) for m in models]
    fused = fuse_probabilities(probs[0], probs[1]) if len(probs) == 2 else probs[0]
    pred = (fused[:, FAKE_LABEL] > threshold).astype(np.int64)
    return metrics_from_predictions(labels, pred)


def evaluate_dataset(
    models,
    data: LabeledDataset,
    threshold: float = DEFAULT_THRESHOLD,
    workers: int = 1,
) -> MetricsReport:
    """Metrics of one model, or of the fused pair when two are given."""
    if len(data) == 0:
        raise EvaluationError("cannot evaluate an empty dataset")
    images = [data.image(i) for i in range(len(data))]
    return evaluate_images(models, images, data.labels, threshold, workers)


# --- robustness sweep -----------------------------------------------------------


@dataclass(frozen=True)
class RobustnessConfig:
    """Perturbation grids applied to test images only."""

    blur_sigmas: tuple[float, ...] = (3.0, 5.0, 7.0, 9.0, 11.0)
    jpeg_qualities: tuple[int, ...] = (85, 87, 90, 92, 95)

    def __post_init__(self) -> None:
        sigmas = tuple(float(s) for s in self.blur_sigmas)
        if any(not np.isfinite(s) or s <= 0 for s in sigmas):
            raise InvalidConfigError(f"blur sigmas must be positive, got {self.blur_sigmas}")
        qualities = tuple(int(q) for q in self.jpeg_qualities)
        if any(not 1 <= q <= 100 for q in qualities):
            raise InvalidConfigError(
                f"JPEG qualities must lie in [1, 100], got {self.jpeg_qualities}"
            )
        object.__setattr__(self, "blur_sigmas", sigmas)
        object.__setattr__(self, "jpeg_qualities", qualities)


@dataclass(frozen=True)
class SweepRow:
    """One (perturbation, model) cell of the sweep table."""

    perturbation_kind: str
    perturbation_value: float | None
    model: str
    report: MetricsReport


def robustness_sweep(
    models,
    test: LabeledDataset,
    rcfg: RobustnessConfig = RobustnessConfig(),
    threshold: float = DEFAULT_THRESHOLD,
    workers: int = 1,
) -> list[SweepRow]:
    """Clean row plus one row per grid point, per model (and fused pair).

    Only the in-memory copies of the test images are perturbed; the
    dataset sources and the models are read-only throughout.
    """
    models = _resolve_models(models)
    if len(test) == 0:
        raise EvaluationError("cannot sweep an empty test set")
    clean = [test.image(i) for i in range(len(test))]
    labels = test.labels

    conditions: list[tuple[str, float | None, list[np.ndarray]]] = [("clean", None, clean)]
    for sigma in rcfg.blur_sigmas:
        conditions.append(("blur", sigma, [gaussian_blur(img, sigma) for img in clean]))
    for quality in rcfg.jpeg_qualities:
        conditions.append(
            ("jpeg", float(quality), [jpeg_roundtrip(img, quality) for img in clean])
        )

    names = [_model_name(m, f"model_{chr(ord('a') + i)}") for i, m in enumerate(models)]
    rows: list[SweepRow] = []
    for kind, value, images in conditions:
        probs = [dataset_probabilities(m, images, workers=workers) for m in models]
        scored = list(zip(names, probs))
        if len(models) == 2:
            scored.append(("fused", fuse_probabilities(probs[0], probs[1])))
        for name, p in scored:
            pred = (p[:, FAKE_LABEL] > threshold).astype(np.int64)
            rows.append(
                SweepRow(kind, value, name, metrics_from_predictions(labels, pred))
            )
    return rows


def sweep_records(rows: Sequence[SweepRow]) -> list[dict]:
    """Flatten sweep rows into CSV-ready records."""
    records = []
    for row in rows:
        records.append(
            {
                "perturbation_kind": row.perturbation_kind,
                "perturbation_value": (
                    "" if row.perturbation_value is None else row.perturbation_value
                ),
                "model": row.model,
                "accuracy": row.report.accuracy,
                "f1_fake": row.report.f1_fake,
                "f1_real": row.report.f1_real,
                "n": row.report.n,
            }
        )
    return records


def write_sweep_csv(path: str | Path, rows: Sequence[SweepRow]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_FIELDS)
        writer.writeheader()
        writer.writerows(sweep_records(rows))


def read_sweep_csv(path: str | Path) -> list[dict]:
    """Records back from disk with numeric fields restored."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or tuple(reader.fieldnames) != CSV_FIELDS:
            raise InvalidInputError(f"{path}: unexpected CSV header {reader.fieldnames}")
        records = []
        for raw in reader:
            records.append(
                {
                    "perturbation_kind": raw["perturbation_kind"],
                    "perturbation_value": (
                        float(raw["perturbation_value"])
                        if raw["perturbation_value"]
                        else ""
                    ),
                    "model": raw["model"],
                    "accuracy": float(raw["accuracy"]),
                    "f1_fake": float(raw["f1_fake"]),
                    "f1_real": float(raw["f1_real"]),
                    "n": int(raw["n"]),
                }
            )
        return records


def plot_sweep(records: Sequence[dict], out_dir: str | Path) -> list[Path]:
    """Accuracy-vs-perturbation line charts, one standalone SVG per kind."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    axis_labels = {"blur": "Gaussian blur sigma", "jpeg": "JPEG quality factor"}
    clean_acc = {
        r["model"]: r["accuracy"] for r in records if r["perturbation_kind"] == "clean"
    }
    written: list[Path] = []
    for kind in ("blur", "jpeg"):
        subset = [r for r in records if r["perturbation_kind"] == kind]
        if not subset:
            continue
        fig, ax = plt.subplots(figsize=(5.0, 3.5))
        for model in sorted({r["model"] for r in subset}):
            points = sorted(
                (float(r["perturbation_value"]), r["accuracy"])
                for r in subset
                if r["model"] == model
            )
            ax.plot(*zip(*points), marker="o", label=model)
            if model in clean_acc:
                ax.axhline(clean_acc[model], linestyle=":", linewidth=0.8, alpha=0.5)
        ax.set_xlabel(axis_labels[kind])
        ax.set_ylabel("accuracy")
        ax.set_ylim(0.0, 1.05)
        ax.legend()
        fig.tight_layout()
        path = out_dir / f"robustness_{kind}.svg"
        fig.savefig(path, format="svg")
        plt.close(fig)
        written.append(path)
    return written
