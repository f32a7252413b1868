from app.algorithms.detectors.base import AnomalyDetector, Calibration, calibrate, normalize
from app.algorithms.detectors.families import DETECTOR_CLASSES
from app.algorithms.detectors.pool import (
    build_pool,
    create_detector,
    fit,
    fit_pool,
    reduce_windows,
    score_matrix,
    score_series,
)

__all__ = [
    "AnomalyDetector",
    "Calibration",
    "DETECTOR_CLASSES",
    "build_pool",
    "calibrate",
    "create_detector",
    "fit",
    "fit_pool",
    "normalize",
    "reduce_windows",
    "score_matrix",
    "score_series",
]
