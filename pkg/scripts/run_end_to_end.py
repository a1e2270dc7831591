#!/usr/bin/env python3
"""Full pipeline at desk scale: corpus, both streams, fusion, robustness.

Writes everything under --workdir (default ./runs/end_to_end):
corpus PNGs, the two trained models, the clean evaluation CSV, the
robustness sweep CSV with its SVG plots, and a markdown summary. Every
stage goes through the CLI entry points, so a run of this script doubles
as an integration test of the shipped commands.
"""

import argparse
import sys
import time
from pathlib import Path

from fakedet.cli import run_cli


def sh(argv: list[str]) -> None:
    print(f"$ fakedet {' '.join(argv)}")
    t0 = time.perf_counter()
    code = run_cli(argv)
    if code != 0:
        sys.exit(f"step failed with exit code {code}")
    print(f"  ... {time.perf_counter() - t0:.1f} s")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--workdir", default="runs/end_to_end")
    parser.add_argument("--n-train", type=int, default=500, help="train images per class")
    parser.add_argument("--n-val", type=int, default=100)
    parser.add_argument("--n-test", type=int, default=100)
    parser.add_argument("--size", type=int, default=64)
    parser.add_argument("--epochs", type=int, default=6)
    parser.add_argument("--lr", type=float, default=1e-3)
    parser.add_argument("--seed", type=int, default=11)
    parser.add_argument("--workers", type=int, default=1)
    args = parser.parse_args()

    work = Path(args.workdir)
    corpus = work / "corpus"
    models = work / "models"
    models.mkdir(parents=True, exist_ok=True)
    freq_model = models / "frequency.fdm"
    spat_model = models / "spatial.fdm"

    sh(
        ["synth", "--out", str(corpus), "--size", str(args.size),
         "--n-train", str(args.n_train), "--n-val", str(args.n_val),
         "--n-test", str(args.n_test), "--seed", str(args.seed)]
    )
    train_common = [
        "--data", str(corpus), "--epochs", str(args.epochs), "--lr", str(args.lr),
        "--dtype", "float32", "--seed", str(args.seed), "--workers", str(args.workers),
    ]
    sh(["train", "--stream", "frequency", "--out", str(freq_model)] + train_common)
    sh(["train", "--stream", "spatial", "--out", str(spat_model)] + train_common)
    sh(
        ["eval", "--model-a", str(freq_model), "--model-b", str(spat_model),
         "--data", str(corpus / "test"), "--out", str(work / "clean_eval.csv")]
    )
    sh(
        ["robustness", "--model-a", str(freq_model), "--model-b", str(spat_model),
         "--data", str(corpus / "test"), "--out-dir", str(work / "robustness")]
    )
    sh(
        ["report", "--csv", str(work / "robustness" / "robustness.csv"),
         "--out-dir", str(work / "report")]
    )
    print(f"\nartifacts under {work}/")


if __name__ == "__main__":
    main()
