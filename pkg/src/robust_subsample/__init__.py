"""Robust subsampling estimators for high-dimensional data under heavy tails,
contamination and dependence."""

__version__ = "0.1.0"

from .ais import AisConfig, run_ais, update_weights
from .baselines import fit_lasso, fit_ols, fit_ridge, fit_uniform_subsample
from .core import (
    Dataset,
    EstimateResult,
    EstimationFailure,
    InvalidArgument,
    SeededRng,
    SubsampleDraw,
    WeightVector,
    draw_weighted,
    uniform_draw,
    validate_dataset,
)
from .datagen import EnvironmentSpec, Noise, corrupt_rows, gen_linear, gen_location, generate
from .loss import SQUARED, LossKind, huber, loss_gradient, loss_value, weighted_erm
from .robust import MomConfig, coordinate_median, geometric_median, median_of_means, robust_distances
from .stratified import StratConfig, allocate, run_stratified, stratify

__all__ = [
    "AisConfig",
    "Dataset",
    "EnvironmentSpec",
    "EstimateResult",
    "EstimationFailure",
    "InvalidArgument",
    "LossKind",
    "MomConfig",
    "Noise",
    "SQUARED",
    "SeededRng",
    "StratConfig",
    "SubsampleDraw",
    "WeightVector",
    "allocate",
    "coordinate_median",
    "corrupt_rows",
    "draw_weighted",
    "fit_lasso",
    "fit_ols",
    "fit_ridge",
    "fit_uniform_subsample",
    "gen_linear",
    "gen_location",
    "generate",
    "geometric_median",
    "huber",
    "loss_gradient",
    "loss_value",
    "median_of_means",
    "robust_distances",
    "run_ais",
    "run_stratified",
    "stratify",
    "uniform_draw",
    "update_weights",
    "validate_dataset",
    "weighted_erm",
]
