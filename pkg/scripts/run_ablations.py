#!/usr/bin/env python3
"""Ablation grid over the frequency stream's three configuration axes.

Trains one frequency-stream model per setting on a shared synthetic
corpus and reports clean test accuracy per row:

* transform set: dft+dwt (full cube), dft only, dwt only;
* colorspace: ycbcr (default), rgb, ycbcr with swapped unscaled chroma;
* block size: 8 (default), 16, 32, full image.

Results land in <workdir>/ablations.csv and are echoed as a table.
"""

import argparse
import csv
import time
from pathlib import Path

from fakedet import (
    AugmentConfig,
    SynthConfig,
    TrainConfig,
    TransformConfig,
    evaluate_dataset,
    synth_split,
    train_stream,
)


def build_axes() -> list[tuple[str, TransformConfig]]:
    rows: list[tuple[str, TransformConfig]] = [
        ("dft+dwt ycbcr b8", TransformConfig()),
        ("dft only", TransformConfig(transforms=("dft",))),
        ("dwt only", TransformConfig(transforms=("dwt",))),
        ("rgb colorspace", TransformConfig(colorspace="rgb")),
        ("swapped chroma", TransformConfig(chroma_swap=True)),
        ("block 16", TransformConfig(block_size=16)),
        ("block 32", TransformConfig(block_size=32)),
        ("whole-image block", TransformConfig(block_size=None)),
    ]
    return rows


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--workdir", default="runs/ablations")
    parser.add_argument("--n-train", type=int, default=200, help="train images per class")
    parser.add_argument("--n-val", type=int, default=50)
    parser.add_argument("--n-test", type=int, default=50)
    parser.add_argument("--size", type=int, default=64)
    parser.add_argument("--epochs", type=int, default=4)
    parser.add_argument("--lr", type=float, default=1e-3)
    parser.add_argument("--seed", type=int, default=11)
    args = parser.parse_args()

    work = Path(args.workdir)
    work.mkdir(parents=True, exist_ok=True)

    cfg = SynthConfig(size=args.size)
    train, cursor = synth_split(cfg, args.n_train, "train")
    val, cursor = synth_split(cfg, args.n_val, "val", start_index=cursor)
    test, _ = synth_split(cfg, args.n_test, "test", start_index=cursor)
    tcfg = TrainConfig(
        learning_rate=args.lr, epochs=args.epochs, seed=args.seed, dtype="float32"
    )
    acfg = AugmentConfig(seed=args.seed)

    records = []
    for name, xcfg in build_axes():
        t0 = time.perf_counter()
        model = train_stream("frequency", train, val, tcfg, xcfg, acfg)
        report = evaluate_dataset(model, test)
        records.append(
            {
                "setting": name,
                "colorspace": xcfg.colorspace,
                "transforms": "+".join(xcfg.transforms),
                "block_size": xcfg.block_size if xcfg.block_size else "full",
                "chroma_swap": xcfg.chroma_swap,
                "channels": xcfg.channel_count,
                "accuracy": report.accuracy,
                "f1_fake": report.f1_fake,
                "f1_real": report.f1_real,
                "seconds": round(time.perf_counter() - t0, 1),
            }
        )
        print(
            f"{name:24s} acc {report.accuracy:.3f} f1_fake {report.f1_fake:.3f} "
            f"({records[-1]['seconds']} s)"
        )

    out = work / "ablations.csv"
    with open(out, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(records[0]))
        writer.writeheader()
        writer.writerows(records)
    print(f"\nwrote {out}")


if __name__ == "__main__":
    main()
