from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from app.core.exceptions import InvalidParameterError


@dataclass(frozen=True)
class ScoreMatrix:
    """N rows (windows or timesteps) by M detectors of normalized scores."""

    scores: np.ndarray
    detector_ids: tuple[str, ...]

    def __post_init__(self) -> None:
        scores = np.asarray(self.scores, dtype=np.float64)
        if scores.ndim != 2 or scores.shape[1] != len(self.detector_ids):
            raise InvalidParameterError(
                f"Score matrix shape {scores.shape} does not match {len(self.detector_ids)} detectors"
            )
        if scores.size and (scores.min() < 0.0 or scores.max() > 1.0):
            raise InvalidParameterError("Score matrix entries must lie in [0, 1]")
        object.__setattr__(self, "scores", scores)
        object.__setattr__(self, "detector_ids", tuple(self.detector_ids))

    @property
    def rows(self) -> int:
        return int(self.scores.shape[0])

    @property
    def width(self) -> int:
        return len(self.detector_ids)

    def columns(self, indices: Sequence[int]) -> np.ndarray:
        return self.scores[:, list(indices)]

    def column(self, detector_id: str) -> np.ndarray:
        return self.scores[:, self.detector_ids.index(detector_id)]


@dataclass(frozen=True)
class LabeledScores:
    """A score matrix paired with the labels of its rows."""

    matrix: ScoreMatrix
    labels: np.ndarray

    def __post_init__(self) -> None:
        labels = np.asarray(self.labels).astype(np.int8).reshape(-1)
        if labels.shape[0] != self.matrix.rows:
            raise InvalidParameterError(
                f"{self.matrix.rows} score rows but {labels.shape[0]} labels"
            )
        object.__setattr__(self, "labels", labels)
