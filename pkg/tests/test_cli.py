import json

import numpy as np
import pytest

from fakedet import (
    SynthConfig,
    load_model,
    read_fqc,
    read_sweep_csv,
    save_image_png,
    synth_real,
    write_corpus,
)
from fakedet.cli import run_cli


def run(argv, capsys=None):
    code = run_cli(argv)
    if capsys is not None:
        return code, capsys.readouterr()
    return code


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("corpus")
    code = run_cli(
        [
            "synth",
            "--out",
            str(root),
            "--size",
            "16",
            "--n-train",
            "6",
            "--n-val",
            "3",
            "--n-test",
            "3",
            "--seed",
            "0",
        ]
    )
    assert code == 0
    return root


@pytest.fixture(scope="module")
def models(corpus, tmp_path_factory):
    out = tmp_path_factory.mktemp("models")
    common = [
        "--data", str(corpus),
        "--epochs", "4",
        "--lr", "3e-3",
        "--batch-size", "8",
        "--dtype", "float32",
        "--aug-prob", "0.0",
        "--seed", "0",
    ]
    freq = out / "freq.fdm"
    spat = out / "spatial.fdm"
    assert run_cli(["train", "--stream", "frequency", "--out", str(freq)] + common) == 0
    assert run_cli(["train", "--stream", "spatial", "--out", str(spat)] + common) == 0
    return freq, spat


# --- synth ---------------------------------------------------------------------


def test_synth_writes_corpus_and_resolved_config(corpus):
    for split, n in (("train", 6), ("val", 3), ("test", 3)):
        for cls in ("real", "fake"):
            assert len(list((corpus / split / cls).glob("*.png"))) == n
    manifest = json.loads((corpus / "manifest.json").read_text())
    assert manifest["config"]["size"] == 16
    resolved = json.loads((corpus / "resolved_config.json").read_text())
    assert resolved["command"] == "synth"
    assert resolved["size"] == 16
    assert resolved["n_train"] == 6


def test_synth_same_seed_same_bytes(tmp_path):
    args = ["synth", "--size", "16", "--n-train", "1", "--n-val", "1",
            "--n-test", "1", "--seed", "7"]
    a, b = tmp_path / "a", tmp_path / "b"
    assert run_cli(args + ["--out", str(a)]) == 0
    assert run_cli(args + ["--out", str(b)]) == 0
    for pa in sorted(a.rglob("*.png")):
        pb = b / pa.relative_to(a)
        assert pa.read_bytes() == pb.read_bytes()


def test_synth_seed_changes_bytes(tmp_path):
    base = ["synth", "--size", "16", "--n-train", "1", "--n-val", "0", "--n-test", "0"]
    a, b = tmp_path / "a", tmp_path / "b"
    assert run_cli(base + ["--seed", "0", "--out", str(a)]) == 0
    assert run_cli(base + ["--seed", "1", "--out", str(b)]) == 0
    pa = sorted(a.rglob("*.png"))[0]
    pb = sorted(b.rglob("*.png"))[0]
    assert pa.read_bytes() != pb.read_bytes()


# --- transform -----------------------------------------------------------------


def test_transform_writes_cube_and_sidecar(tmp_path):
    img_path = tmp_path / "img.png"
    save_image_png(img_path, synth_real(SynthConfig(size=32), 0))
    out = tmp_path / "cube.fqc"
    code = run_cli(["transform", "--in", str(img_path), "--out", str(out)])
    assert code == 0
    cube = read_fqc(out)
    assert cube.shape == (32, 32, 18)
    sidecar = json.loads((tmp_path / "cube.fqc.config.json").read_text())
    assert sidecar["command"] == "transform"
    assert sidecar["transforms"] == "dft,dwt"


def test_transform_ablation_flags_change_channel_count(tmp_path):
    img_path = tmp_path / "img.png"
    save_image_png(img_path, synth_real(SynthConfig(size=32), 1))
    for transforms, channels in (("dft", 6), ("dwt", 12)):
        out = tmp_path / f"{transforms}.fqc"
        code = run_cli(
            ["transform", "--in", str(img_path), "--out", str(out),
             "--transforms", transforms]
        )
        assert code == 0
        assert read_fqc(out).shape == (32, 32, channels)


def test_transform_block_size_and_colorspace_flags(tmp_path):
    img_path = tmp_path / "img.png"
    save_image_png(img_path, synth_real(SynthConfig(size=32), 2))
    out = tmp_path / "full.fqc"
    code = run_cli(
        ["transform", "--in", str(img_path), "--out", str(out),
         "--block-size", "full", "--colorspace", "rgb", "--chroma-swap"]
    )
    assert code == 0
    assert read_fqc(out).shape == (32, 32, 18)


def test_transform_resize_flag(tmp_path):
    img_path = tmp_path / "img.png"
    save_image_png(img_path, np.random.default_rng(0).random((40, 56, 3)))
    out = tmp_path / "resized.fqc"
    code = run_cli(
        ["transform", "--in", str(img_path), "--out", str(out), "--resize", "32"]
    )
    assert code == 0
    assert read_fqc(out).shape == (32, 32, 18)


def test_transform_deterministic_output(tmp_path):
    img_path = tmp_path / "img.png"
    save_image_png(img_path, synth_real(SynthConfig(size=32), 3))
    a, b = tmp_path / "a.fqc", tmp_path / "b.fqc"
    for out in (a, b):
        assert run_cli(["transform", "--in", str(img_path), "--out", str(out)]) == 0
    assert a.read_bytes() == b.read_bytes()


# --- train ----------------------------------------------------------------------


def test_train_writes_model_and_sidecar(models):
    freq, spat = models
    for path, stream, channels in ((freq, "frequency", 18), (spat, "spatial", 3)):
        params = load_model(path)
        assert params.metadata["stream"] == stream
        assert params.spec.input_channels == channels
        sidecar = json.loads(
            path.with_name(path.name + ".config.json").read_text()
        )
        assert sidecar["command"] == "train"
        assert sidecar["epochs"] == 4
        assert sidecar["dtype"] == "float32"
    assert load_model(freq).normalizer is not None
    assert load_model(spat).normalizer is None


def test_train_deterministic_across_runs(corpus, models, tmp_path):
    freq, _ = models
    again = tmp_path / "again.fdm"
    code = run_cli(
        ["train", "--stream", "frequency", "--data", str(corpus), "--out", str(again),
         "--epochs", "4", "--lr", "3e-3", "--batch-size", "8", "--dtype", "float32",
         "--aug-prob", "0.0", "--seed", "0"]
    )
    assert code == 0
    a, b = load_model(freq), load_model(again)
    for name in a.tensors:
        assert (a.tensors[name] == b.tensors[name]).all()


def test_train_config_file_merge(corpus, tmp_path):
    cfg_path = tmp_path / "train.json"
    cfg_path.write_text(json.dumps({"epochs": 1, "lr": 3e-3, "dtype": "float32",
                                    "batch_size": 8, "aug_prob": 0.0}))
    out = tmp_path / "m.fdm"
    # the flag overrides the file's epochs: 0 epochs means init snapshot only
    code = run_cli(
        ["train", "--stream", "frequency", "--data", str(corpus), "--out", str(out),
         "--config", str(cfg_path), "--epochs", "0", "--seed", "0"]
    )
    assert code == 0
    params = load_model(out)
    assert params.metadata["best_epoch"] == 0
    assert params.metadata["train_config"]["epochs"] == 0
    assert params.metadata["train_config"]["learning_rate"] == 3e-3
    resolved = json.loads((tmp_path / "m.fdm.config.json").read_text())
    assert resolved["epochs"] == 0
    assert resolved["lr"] == 3e-3
    assert resolved["config"] == str(cfg_path)


# --- eval ----------------------------------------------------------------------


def test_eval_single_model(corpus, models, tmp_path, capsys):
    freq, _ = models
    out = tmp_path / "eval.csv"
    code, captured = run(
        ["eval", "--model", str(freq), "--data", str(corpus / "test"),
         "--out", str(out)],
        capsys,
    )
    assert code == 0
    records = read_sweep_csv(out)
    assert len(records) == 1
    assert records[0]["model"] == "frequency"
    assert records[0]["perturbation_kind"] == "clean"
    assert records[0]["n"] == 6
    assert "accuracy" in captured.out


def test_eval_fused_pair(corpus, models, tmp_path):
    freq, spat = models
    out = tmp_path / "eval.csv"
    code = run_cli(
        ["eval", "--model-a", str(freq), "--model-b", str(spat),
         "--data", str(corpus / "test"), "--out", str(out)]
    )
    assert code == 0
    records = read_sweep_csv(out)
    assert [r["model"] for r in records] == ["frequency", "spatial", "fused"]


def test_eval_requires_a_model(corpus, tmp_path, capsys):
    out = tmp_path / "eval.csv"
    code, captured = run(
        ["eval", "--data", str(corpus / "test"), "--out", str(out)], capsys
    )
    assert code == 1
    assert "no model given" in captured.err


# --- robustness and report --------------------------------------------------------


def test_robustness_writes_csv_and_plots(corpus, models, tmp_path):
    freq, spat = models
    out_dir = tmp_path / "sweep"
    code = run_cli(
        ["robustness", "--model-a", str(freq), "--model-b", str(spat),
         "--data", str(corpus / "test"), "--out-dir", str(out_dir),
         "--blur-sigmas", "1,2", "--jpeg-qualities", "85,95"]
    )
    assert code == 0
    records = read_sweep_csv(out_dir / "robustness.csv")
    assert len(records) == (1 + 2 + 2) * 3
    assert (out_dir / "robustness_blur.svg").exists()
    assert (out_dir / "robustness_jpeg.svg").exists()
    assert json.loads((out_dir / "resolved_config.json").read_text())["command"] == "robustness"


def test_report_from_csv(corpus, models, tmp_path):
    freq, _ = models
    sweep_dir = tmp_path / "sweep"
    code = run_cli(
        ["robustness", "--model", str(freq), "--data", str(corpus / "test"),
         "--out-dir", str(sweep_dir), "--blur-sigmas", "1", "--jpeg-qualities", "90"]
    )
    assert code == 0
    report_dir = tmp_path / "report"
    code = run_cli(
        ["report", "--csv", str(sweep_dir / "robustness.csv"),
         "--out-dir", str(report_dir)]
    )
    assert code == 0
    summary = (report_dir / "summary.md").read_text()
    assert summary.startswith("| perturbation |")
    assert "| clean |" in summary
    assert (report_dir / "robustness_blur.svg").exists()


# --- exit codes -------------------------------------------------------------------


def test_usage_error_exits_2():
    assert run_cli(["synth"]) == 2  # missing --out
    assert run_cli(["no-such-command"]) == 2
    assert run_cli(["train", "--stream", "tempo"]) == 2


def test_io_error_exits_1(tmp_path, capsys):
    code, captured = run(
        ["transform", "--in", str(tmp_path / "missing.png"),
         "--out", str(tmp_path / "c.fqc")],
        capsys,
    )
    assert code == 1
    assert "missing.png" in captured.err


def test_bad_config_value_exits_1(corpus, tmp_path, capsys):
    out = tmp_path / "m.fdm"
    code, captured = run(
        ["train", "--stream", "frequency", "--data", str(corpus),
         "--out", str(out), "--epochs", "1", "--transforms", "dct"],
        capsys,
    )
    assert code == 1
    assert "error:" in captured.err


def test_bad_config_json_exits_1(corpus, tmp_path, capsys):
    cfg = tmp_path / "broken.json"
    cfg.write_text("{not json")
    code, captured = run(
        ["synth", "--out", str(tmp_path / "c"), "--config", str(cfg)], capsys
    )
    assert code == 1
    assert "bad JSON" in captured.err
