"""Two-stream fake-image detector.

The frequency stream fuses blockwise DFT and single-level Haar DWT
coefficients over YCbCr channels into an 18-channel cube; the spatial
stream consumes augmented RGB pixels. Stream verdicts are combined by
class-probability averaging. A deterministic synthetic corpus with
generator-style spectral artifacts makes training, fusion, robustness
sweeps, and ablations verifiable at desk scale.
"""

from .augment import (
    AugmentConfig,
    AugmentPlan,
    apply_augment_plan,
    augment,
    derive_rng,
    draw_augment_plan,
    gaussian_blur,
    gaussian_filter,
    gaussian_kernel,
    jpeg_roundtrip,
)
from .colorspace import ITU601, ColorCoefficients, rgb_to_ycbcr, ycbcr_to_rgb
from .corpus import (
    FAKE_LABEL,
    REAL_LABEL,
    LabeledDataset,
    SynthConfig,
    load_image,
    load_image_dir,
    mean_high_frequency_energy,
    pool_upsample,
    preprocess_crop_resize,
    resize_bilinear,
    save_image_png,
    synth_fake,
    synth_real,
    synth_split,
    write_corpus,
)
from .errors import (
    AugmentationError,
    EvaluationError,
    FakedetError,
    IngestionError,
    InvalidConfigError,
    InvalidInputError,
    TrainingError,
)
from .evaluate import (
    MetricsReport,
    RobustnessConfig,
    SweepRow,
    dataset_probabilities,
    evaluate_dataset,
    evaluate_images,
    fuse_probabilities,
    metrics_from_predictions,
    plot_sweep,
    read_sweep_csv,
    robustness_sweep,
    sweep_records,
    write_sweep_csv,
)
from .features import input_channels_for, stream_features
from .modelio import load_model, save_model
from .network import (
    AdamState,
    ModelParams,
    NetworkSpec,
    TrainConfig,
    adam_step,
    forward,
    init_adam_state,
    init_params,
    loss_and_grad,
    predict_proba,
    softmax,
)
from .train import train_stream
from .transforms import (
    ChannelNormalizer,
    FrequencyCube,
    SubbandSet,
    TransformConfig,
    apply_normalizer,
    assemble_frequency_cube,
    blockwise_dft,
    blockwise_haar_dwt,
    blockwise_haar_idwt,
    blockwise_idft,
    config_from_dict,
    config_to_dict,
    cube_channel_names,
    dumps_json,
    fit_channel_normalizer,
    read_fqc,
    unapply_normalizer,
    upsample_nearest,
    write_fqc,
)

__version__ = "0.1.0"

__all__ = [
    "AdamState",
    "AugmentConfig",
    "AugmentPlan",
    "AugmentationError",
    "ChannelNormalizer",
    "ColorCoefficients",
    "EvaluationError",
    "FAKE_LABEL",
    "FakedetError",
    "FrequencyCube",
    "ITU601",
    "IngestionError",
    "InvalidConfigError",
    "InvalidInputError",
    "LabeledDataset",
    "MetricsReport",
    "ModelParams",
    "NetworkSpec",
    "REAL_LABEL",
    "RobustnessConfig",
    "SubbandSet",
    "SweepRow",
    "SynthConfig",
    "TrainConfig",
    "TrainingError",
    "TransformConfig",
    "adam_step",
    "apply_augment_plan",
    "apply_normalizer",
    "assemble_frequency_cube",
    "augment",
    "blockwise_dft",
    "blockwise_haar_dwt",
    "blockwise_haar_idwt",
    "blockwise_idft",
    "config_from_dict",
    "config_to_dict",
    "cube_channel_names",
    "dataset_probabilities",
    "derive_rng",
    "draw_augment_plan",
    "dumps_json",
    "evaluate_dataset",
    "evaluate_images",
    "fit_channel_normalizer",
    "forward",
    "fuse_probabilities",
    "gaussian_blur",
    "gaussian_filter",
    "gaussian_kernel",
    "init_adam_state",
    "init_params",
    "input_channels_for",
    "jpeg_roundtrip",
    "load_image",
    "load_image_dir",
    "load_model",
    "loss_and_grad",
    "mean_high_frequency_energy",
    "metrics_from_predictions",
    "plot_sweep",
    "pool_upsample",
    "predict_proba",
    "preprocess_crop_resize",
    "read_fqc",
    "read_sweep_csv",
    "resize_bilinear",
    "rgb_to_ycbcr",
    "robustness_sweep",
    "save_image_png",
    "save_model",
    "softmax",
    "stream_features",
    "sweep_records",
    "synth_fake",
    "synth_real",
    "synth_split",
    "train_stream",
    "unapply_normalizer",
    "upsample_nearest",
    "write_corpus",
    "write_fqc",
    "write_sweep_csv",
    "ycbcr_to_rgb",
]
