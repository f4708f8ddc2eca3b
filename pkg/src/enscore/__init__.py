"""enscore: scoring harness for Earth-surface forecasting.

Minicube sample containers, the four masked subscores with
harmonic-mean composition, track-aware parallel dataset evaluation, a
persistence baseline, and a synthetic-data generator/splitter for
desk-scale testing.
"""

__version__ = "0.1.0"

from .baselines import PersistenceConfig, persistence_predict, run_baseline
from .cubes import (
    CubeMetadata,
    Minicube,
    PredictionSet,
    load_minicube,
    load_prediction_set,
    ndvi,
    ndvi_mask,
    save_minicube,
    save_prediction_set,
    split_context_target,
)
from .errors import (
    EnscoreError,
    GeometryMismatchError,
    InvalidValueError,
    MissingArrayError,
    MissingPredictionError,
    ShapeMismatchError,
    SplitInfeasibleError,
)
from .evaluator import (
    EvaluationReport,
    emit_report,
    evaluate_dataset,
    select_best_member,
)
from .metrics import (
    RescaleFactors,
    SubscoreSet,
    compose_ens,
    emd_score,
    mad_score,
    ols_score,
    score_cube,
    ssim_score,
    wasserstein1_1d,
)
from .synthcube import SplitConfig, SynthConfig, generate_cubes, split_dataset
from .tracks import TRACKS, TrackSpec, get_track

__all__ = [
    "CubeMetadata",
    "EnscoreError",
    "EvaluationReport",
    "GeometryMismatchError",
    "InvalidValueError",
    "Minicube",
    "MissingArrayError",
    "MissingPredictionError",
    "PersistenceConfig",
    "PredictionSet",
    "RescaleFactors",
    "ShapeMismatchError",
    "SplitConfig",
    "SplitInfeasibleError",
    "SubscoreSet",
    "SynthConfig",
    "TRACKS",
    "TrackSpec",
    "compose_ens",
    "emd_score",
    "emit_report",
    "evaluate_dataset",
    "generate_cubes",
    "get_track",
    "load_minicube",
    "load_prediction_set",
    "mad_score",
    "ndvi",
    "ndvi_mask",
    "ols_score",
    "persistence_predict",
    "run_baseline",
    "save_minicube",
    "save_prediction_set",
    "score_cube",
    "select_best_member",
    "split_context_target",
    "split_dataset",
    "ssim_score",
    "wasserstein1_1d",
]
