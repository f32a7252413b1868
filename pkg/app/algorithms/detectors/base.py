import logging
from abc import ABC, abstractmethod
from typing import ClassVar

import numpy as np
from typing_extensions import Self

from app.core.exceptions import (
    DimensionMismatchError,
    InsufficientDataError,
    InvalidParameterError,
)
from app.models.detector import DetectorConfig, DetectorFamily
from app.models.series import TimeSeries

logger = logging.getLogger(__name__)

Calibration = tuple[float, float]


def calibrate(raw: np.ndarray) -> Calibration:
    """(min, max) of raw fit scores; a zero range is promoted to (min, min + 1)."""
    finite = raw[np.isfinite(raw)]
    if finite.size == 0:
        return 0.0, 1.0
    lo, hi = float(finite.min()), float(finite.max())
    if hi == lo:
        logger.warning("Zero-range calibration at %.6g; promoting to (%.6g, %.6g)", lo, lo, lo + 1.0)
        hi = lo + 1.0
    return lo, hi


def normalize(raw: np.ndarray, calibration: Calibration) -> np.ndarray:
    lo, hi = calibration
    if not (np.isfinite(lo) and np.isfinite(hi)):
        raise InvalidParameterError(f"Calibration must be finite, got {calibration}")
    raw = np.asarray(raw, dtype=np.float64)
    if hi == lo:
        return np.zeros_like(raw)
    raw = np.nan_to_num(raw, nan=lo, posinf=hi, neginf=lo)
    return np.clip((raw - lo) / (hi - lo), 0.0, 1.0)


class AnomalyDetector(ABC):
    """Base detector: ``fit`` on clean data, then raw or normalized per-timestep scores.

    Subclasses implement ``_fit`` and ``_raw_scores`` on plain (T, d) arrays.
    Fitted state is never modified after ``fit`` returns.
    """

    family: ClassVar[DetectorFamily] = DetectorFamily.CUSTOM

    def __init__(self, config: DetectorConfig) -> None:
        self.config = config
        self.calibration_: Calibration | None = None
        self.n_features_: int | None = None

    @property
    def id(self) -> str:
        return self.config.id

    @property
    def is_fitted(self) -> bool:
        return self.calibration_ is not None

    def min_rows(self) -> int:
        return 2

    def fit(self, train: TimeSeries) -> Self:
        if train.length < self.min_rows():
            raise InsufficientDataError(
                f"Detector {self.id} needs at least {self.min_rows()} rows, got {train.length}"
            )
        self._fit(train.values)
        self.n_features_ = train.dims
        self.calibration_ = calibrate(self._raw_scores(train.values))
        return self

    def score(self, data: TimeSeries) -> np.ndarray:
        if self.calibration_ is None or self.n_features_ is None:
            raise InvalidParameterError(f"Detector {self.id} is not fitted")
        if data.dims != self.n_features_:
            raise DimensionMismatchError(expected=self.n_features_, received=data.dims)
        return self._raw_scores(data.values)

    def normalized_scores(self, data: TimeSeries) -> np.ndarray:
        raw = self.score(data)
        assert self.calibration_ is not None
        return normalize(raw, self.calibration_)

    @abstractmethod
    def _fit(self, values: np.ndarray) -> None: ...

    @abstractmethod
    def _raw_scores(self, values: np.ndarray) -> np.ndarray: ...
