from typing import ClassVar

import numpy as np

from app.algorithms.detectors.base import AnomalyDetector
from app.models.detector import DetectorConfig, DetectorFamily
from app.models.series import TimeSeries


class LabelOracleDetector(AnomalyDetector):
    """Scores 1 exactly where the scored series is labeled anomalous."""

    def _fit(self, values: np.ndarray) -> None:
        pass

    def _raw_scores(self, values: np.ndarray) -> np.ndarray:
        return np.zeros(values.shape[0])

    def score(self, data: TimeSeries) -> np.ndarray:
        super().score(data)
        return data.labels_or_zeros().astype(np.float64)


class ConstantDetector(AnomalyDetector):
    def _fit(self, values: np.ndarray) -> None:
        pass

    def _raw_scores(self, values: np.ndarray) -> np.ndarray:
        return np.zeros(values.shape[0])


class RecordingDetector(ConstantDetector):
    """Remembers whether its training series carried labels."""

    fitted_with_labels: ClassVar[list[bool]] = []

    def fit(self, train: TimeSeries) -> "RecordingDetector":
        RecordingDetector.fitted_with_labels.append(train.has_labels)
        super().fit(train)
        return self


def custom(cls: type[AnomalyDetector], detector_id: str) -> AnomalyDetector:
    return cls(DetectorConfig(id=detector_id, family=DetectorFamily.CUSTOM))


def oracle_pool() -> list[AnomalyDetector]:
    return [custom(LabelOracleDetector, "oracle"), custom(ConstantDetector, "constant")]
