"""Pixel-wise multi-illuminant colour constancy at desk scale."""

from .baselines import gray_world, white_patch
from .bilateral import PAPER_DEFAULT, BilateralConfig, apply_postfilter, bilateral_filter
from .estimator import (
    PRESETS,
    EstimatorParams,
    TrainConfig,
    backward,
    forward,
    infer,
    init_params,
    load_params,
    preset_config,
    save_params,
    train,
)
from .evaluation import ErrorSummary, angular_error_map, evaluate_method, image_error, summarize
from .formats import read_float_map, read_image, write_float_map, write_image
from .imagecore import apply_white_balance, from_log_chroma, resize_bilinear, to_log_chroma
from .losses import LossReport, combined_loss, l2_loss, tv_loss
from .synth import SceneSample, SynthConfig, generate_dataset, make_alpha_map, smooth_alpha, synthesize

__version__ = "0.1.0"
