"""Command-line interface: the full pipeline as reproducible subcommands.

Subcommands: synth, transform, train, eval, robustness, report. Every
flag can also come from a JSON config file (`--config`), with explicit
flags winning, and every run writes its fully resolved configuration
next to its outputs so results can be regenerated from artifacts alone.
All randomness flows from `--seed`. Exit codes: 0 success, 1 runtime or
I/O failure (diagnostic on stderr), 2 usage errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .augment import AugmentConfig
from .corpus import (
    SynthConfig,
    load_image,
    load_image_dir,
    preprocess_crop_resize,
    write_corpus,
)
from .errors import FakedetError, InvalidConfigError
from .evaluate import (
    RobustnessConfig,
    plot_sweep,
    read_sweep_csv,
    robustness_sweep,
    sweep_records,
    write_sweep_csv,
)
from .modelio import load_model, save_model
from .network import TrainConfig
from .train import train_stream
from .transforms import TransformConfig, assemble_frequency_cube, dumps_json, write_fqc

_BLOCK_CHOICES = ("8", "16", "32", "full")


class _Resolver:
    """Merge precedence: explicit flag > config-file key > default."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.resolved: dict = {"command": args.command}
        self.file_config: dict = {}
        config_path = getattr(args, "config", None)
        if config_path:
            try:
                self.file_config = json.loads(Path(config_path).read_text())
            except json.JSONDecodeError as exc:
                raise InvalidConfigError(f"bad JSON in config {config_path}: {exc}") from exc
            if not isinstance(self.file_config, dict):
                raise InvalidConfigError(f"config {config_path} must hold a JSON object")
            self.resolved["config"] = str(config_path)

    def get(self, key: str, default):
        value = getattr(self.args, key, None)
        if value is None:
            value = self.file_config.get(key, default)
        self.resolved[key] = value
        return value


def _write_resolved(target: Path, resolver: _Resolver) -> None:
    if target.suffix:
        out = target.with_name(target.name + ".config.json")
    else:
        target.mkdir(parents=True, exist_ok=True)
        out = target / "resolved_config.json"
    out.write_text(dumps_json(resolver.resolved))


def _parse_numbers(text, kind=float) -> tuple:
    if isinstance(text, (list, tuple)):
        return tuple(kind(v) for v in text)
    return tuple(kind(v) for v in str(text).split(",") if v != "")


def _parse_block_size(value) -> int | None:
    if value is None or value == "full":
        return None
    return int(value)


def _parse_transforms(value) -> tuple[str, ...]:
    if isinstance(value, (list, tuple)):
        return tuple(value)
    return tuple(t.strip() for t in str(value).split(",") if t.strip())


def _transform_config(r: _Resolver) -> TransformConfig:
    return TransformConfig(
        colorspace=r.get("colorspace", "ycbcr"),
        transforms=_parse_transforms(r.get("transforms", "dft,dwt")),
        block_size=_parse_block_size(r.get("block_size", "8")),
        chroma_swap=bool(r.get("chroma_swap", False)),
    )


def _augment_config(r: _Resolver, seed: int) -> AugmentConfig:
    blur_range = _parse_numbers(r.get("aug_blur_range", "0.5,3.0"), float)
    jpeg_range = _parse_numbers(r.get("aug_jpeg_range", "70,95"), int)
    return AugmentConfig(
        probability=float(r.get("aug_prob", 0.1)),
        blur_sigma_range=blur_range,
        jpeg_quality_range=jpeg_range,
        seed=seed,
    )


# --- subcommand implementations -------------------------------------------------


def _cmd_synth(args: argparse.Namespace) -> int:
    r = _Resolver(args)
    cfg = SynthConfig(
        size=int(r.get("size", 64)),
        base_smoothness=float(r.get("base_smoothness", 2.0)),
        artifact_amplitude=float(r.get("artifact_amplitude", 0.02)),
        upsample_factor=int(r.get("upsample_factor", 2)),
        seed=int(r.get("seed", 0)),
    )
    n_train = int(r.get("n_train", 500))
    n_val = int(r.get("n_val", 100))
    n_test = int(r.get("n_test", 100))
    out = Path(args.out)
    manifest = write_corpus(out, cfg, n_train, n_val, n_test)
    _write_resolved(out, r)
    total = 2 * (n_train + n_val + n_test)
    print(f"wrote {total} images under {out} ({len(manifest['splits'])} splits)")
    return 0


def _cmd_transform(args: argparse.Namespace) -> int:
    r = _Resolver(args)
    xcfg = _transform_config(r)
    resize = r.get("resize", None)
    img = load_image(args.input)
    if resize is not None:
        img = preprocess_crop_resize(img, int(resize))
    cube = assemble_frequency_cube(img, xcfg)
    out = Path(args.out)
    write_fqc(out, cube)
    _write_resolved(out, r)
    print(f"wrote {out}: {cube.height}x{cube.width}x{cube.channels} cube")
    return 0


def _cmd_train(args: argparse.Namespace) -> int:
    r = _Resolver(args)
    seed = int(r.get("seed", 0))
    tcfg = TrainConfig(
        learning_rate=float(r.get("lr", 1e-4)),
        weight_decay=float(r.get("weight_decay", 5e-4)),
        batch_size=int(r.get("batch_size", 24)),
        epochs=int(r.get("epochs", 24)),
        dtype=str(r.get("dtype", "float64")),
        seed=seed,
    )
    xcfg = _transform_config(r)
    acfg = _augment_config(r, seed)
    workers = int(r.get("workers", 1))
    data = Path(args.data)
    train_set = load_image_dir(data / "train", split="train")
    val_set = load_image_dir(data / "val", split="val")
    params = train_stream(args.stream, train_set, val_set, tcfg, xcfg, acfg, workers=workers)
    out = Path(args.out)
    save_model(out, params)
    _write_resolved(out, r)
    best = params.metadata.get("best_val_accuracy")
    print(f"wrote {out}: best epoch {params.metadata.get('best_epoch')}, val accuracy {best:.4f}")
    return 0


def _load_models(args: argparse.Namespace) -> list:
    paths = []
    if getattr(args, "model", None):
        paths.append(args.model)
    for key in ("model_a", "model_b"):
        if getattr(args, key, None):
            paths.append(getattr(args, key))
    if not paths:
        raise InvalidConfigError("no model given: use --model or --model-a/--model-b")
    return [load_model(p) for p in paths]


def _cmd_eval(args: argparse.Namespace) -> int:
    r = _Resolver(args)
    threshold = float(r.get("threshold", 0.5))
    workers = int(r.get("workers", 1))
    models = _load_models(args)
    data = load_image_dir(Path(args.data), split="test")
    # empty grids reduce the sweep to the clean row(s): per-model plus fused
    rows = robustness_sweep(
        models,
        data,
        RobustnessConfig(blur_sigmas=(), jpeg_qualities=()),
        threshold=threshold,
        workers=workers,
    )
    out = Path(args.out)
    write_sweep_csv(out, rows)
    _write_resolved(out, r)
    for rec in sweep_records(rows):
        print(
            f"{rec['model']}: accuracy {rec['accuracy']:.4f} "
            f"f1_fake {rec['f1_fake']:.4f} f1_real {rec['f1_real']:.4f} (n={rec['n']})"
        )
    return 0


def _cmd_robustness(args: argparse.Namespace) -> int:
    r = _Resolver(args)
    rcfg = RobustnessConfig(
        blur_sigmas=_parse_numbers(r.get("blur_sigmas", "3,5,7,9,11"), float),
        jpeg_qualities=_parse_numbers(r.get("jpeg_qualities", "85,87,90,92,95"), int),
    )
    threshold = float(r.get("threshold", 0.5))
    workers = int(r.get("workers", 1))
    models = _load_models(args)
    data = load_image_dir(Path(args.data), split="test")
    rows = robustness_sweep(models, data, rcfg, threshold=threshold, workers=workers)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "robustness.csv"
    write_sweep_csv(csv_path, rows)
    plots = plot_sweep(sweep_records(rows), out_dir)
    _write_resolved(out_dir, r)
    print(f"wrote {csv_path} and {len(plots)} plot(s) under {out_dir}")
    return 0


def _cmd_report(args: argparse.Namespace) -> int:
    r = _Resolver(args)
    records = read_sweep_csv(args.csv)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    plots = plot_sweep(records, out_dir)
    lines = ["| perturbation | value | model | accuracy | f1_fake | f1_real | n |",
             "|---|---|---|---|---|---|---|"]
    for rec in records:
        lines.append(
            f"| {rec['perturbation_kind']} | {rec['perturbation_value']} | {rec['model']} "
            f"| {rec['accuracy']:.4f} | {rec['f1_fake']:.4f} | {rec['f1_real']:.4f} "
            f"| {rec['n']} |"
        )
    summary = out_dir / "summary.md"
    summary.write_text("\n".join(lines) + "\n")
    _write_resolved(out_dir, r)
    print(f"wrote {summary} and {len(plots)} plot(s) under {out_dir}")
    return 0


# --- parser ---------------------------------------------------------------------


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="JSON config file; explicit flags override its keys")
    sub.add_argument("--seed", type=int, help="seed for all randomness of this run")


def _add_transform_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--colorspace", choices=("rgb", "ycbcr"), help="input colorspace")
    sub.add_argument("--transforms", help="comma list out of {dft,dwt}")
    sub.add_argument("--block-size", dest="block_size", choices=_BLOCK_CHOICES,
                     help="transform block size, or 'full' for one whole-image block")
    sub.add_argument("--chroma-swap", dest="chroma_swap",
                     action=argparse.BooleanOptionalAction, default=None,
                     help="use the swapped unscaled chroma variant (Cb = R - Y, Cr = B - Y)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fakedet",
        description="Two-stream fake-image detector: frequency (DFT+DWT) and spatial streams",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate the deterministic synthetic PNG corpus")
    p.add_argument("--out", required=True, help="output corpus directory")
    p.add_argument("--n-train", dest="n_train", type=int, help="train images per class")
    p.add_argument("--n-val", dest="n_val", type=int, help="val images per class")
    p.add_argument("--n-test", dest="n_test", type=int, help="test images per class")
    p.add_argument("--size", type=int, help="square image size (multiple of 16)")
    p.add_argument("--base-smoothness", dest="base_smoothness", type=float)
    p.add_argument("--artifact-amplitude", dest="artifact_amplitude", type=float)
    p.add_argument("--upsample-factor", dest="upsample_factor", type=int)
    _add_common(p)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("transform", help="write the frequency cube of one image")
    p.add_argument("--in", dest="input", required=True, help="input PNG/JPEG image")
    p.add_argument("--out", required=True, help="output .fqc cube file")
    p.add_argument("--resize", type=int, help="center crop and resize to this square first")
    _add_transform_flags(p)
    _add_common(p)
    p.set_defaults(func=_cmd_transform)

    p = sub.add_parser("train", help="train one stream on a corpus directory")
    p.add_argument("--stream", required=True, choices=("spatial", "frequency"))
    p.add_argument("--data", required=True, help="corpus root with train/ and val/")
    p.add_argument("--out", required=True, help="output model file")
    p.add_argument("--epochs", type=int)
    p.add_argument("--lr", type=float, help="Adam learning rate")
    p.add_argument("--weight-decay", dest="weight_decay", type=float)
    p.add_argument("--batch-size", dest="batch_size", type=int)
    p.add_argument("--dtype", choices=("float32", "float64"))
    p.add_argument("--aug-prob", dest="aug_prob", type=float,
                   help="per-perturbation augmentation probability")
    p.add_argument("--aug-blur-range", dest="aug_blur_range", help="sigma range lo,hi")
    p.add_argument("--aug-jpeg-range", dest="aug_jpeg_range", help="quality range lo,hi")
    p.add_argument("--workers", type=int, help="parallel sample-processing bound")
    _add_transform_flags(p)
    _add_common(p)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("eval", help="evaluate model(s) on a labeled directory")
    p.add_argument("--model", help="single model file")
    p.add_argument("--model-a", dest="model_a", help="first model of a fused pair")
    p.add_argument("--model-b", dest="model_b", help="second model of a fused pair")
    p.add_argument("--data", required=True, help="directory with real/ and fake/")
    p.add_argument("--out", required=True, help="output CSV report")
    p.add_argument("--threshold", type=float, help="fake-probability decision threshold")
    p.add_argument("--workers", type=int)
    _add_common(p)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("robustness", help="blur/JPEG sweep over a test directory")
    p.add_argument("--model-a", dest="model_a", help="first model file")
    p.add_argument("--model-b", dest="model_b", help="optional second model (enables fusion)")
    p.add_argument("--model", help="alias for a single model")
    p.add_argument("--data", required=True, help="directory with real/ and fake/")
    p.add_argument("--out-dir", dest="out_dir", required=True)
    p.add_argument("--blur-sigmas", dest="blur_sigmas", help="comma list of sigmas")
    p.add_argument("--jpeg-qualities", dest="jpeg_qualities", help="comma list of qualities")
    p.add_argument("--threshold", type=float)
    p.add_argument("--workers", type=int)
    _add_common(p)
    p.set_defaults(func=_cmd_robustness)

    p = sub.add_parser("report", help="re-render plots and a summary table from a sweep CSV")
    p.add_argument("--csv", required=True, help="sweep CSV produced by eval/robustness")
    p.add_argument("--out-dir", dest="out_dir", required=True)
    _add_common(p)
    p.set_defaults(func=_cmd_report)

    return parser


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        return args.func(args)
    except FakedetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    raise SystemExit(run_cli())


if __name__ == "__main__":
    main()
