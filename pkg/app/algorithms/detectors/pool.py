import logging
from collections.abc import Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from typing import Literal

import numpy as np

from app.algorithms.data import window_starts
from app.algorithms.detectors.base import AnomalyDetector
from app.algorithms.detectors.families import DETECTOR_CLASSES
from app.core.exceptions import InvalidParameterError
from app.core.seeding import derive_rng, derive_seed
from app.models.config import FamilyRequest
from app.models.detector import FAMILY_PARAMS, DetectorConfig, DetectorFamily
from app.models.scores import ScoreMatrix
from app.models.series import TimeSeries, WindowSpec

logger = logging.getLogger(__name__)

Reducer = Literal["max", "mean"]


def build_pool(
    requests: Mapping[DetectorFamily, FamilyRequest | int],
    seed: int,
    *,
    n_features: int = 1,
) -> list[DetectorConfig]:
    """Draw detector configurations uniformly from the per-family ranges.

    Families are visited in enum order so the result does not depend on the
    mapping's order. Fixed parameters in a request override the draws.
    """
    configs: list[DetectorConfig] = []
    for family in DetectorFamily:
        if family not in requests:
            continue
        request = requests[family]
        if isinstance(request, int):
            request = FamilyRequest(count=request)
        if request.count and family is DetectorFamily.CUSTOM:
            raise InvalidParameterError("CUSTOM detectors cannot be drawn from a request")
        rng = derive_rng(seed, "pool", family.value)
        fixed = request.fixed_params()
        for i in range(1, request.count + 1):
            params: dict[str, int] = {}
            for name, (low, high) in FAMILY_PARAMS[family].items():
                upper = n_features if high is None else high
                drawn = int(rng.integers(low, upper + 1))
                params[name] = fixed.get(name, drawn)
            configs.append(
                DetectorConfig(
                    id=f"{family.value.lower()}_{i}",
                    family=family,
                    params=params,
                    seed=derive_seed(seed, "detector", family.value, i),
                )
            )
    if len(configs) < 2:
        raise InvalidParameterError(f"A detector pool needs at least 2 members, got {len(configs)}")
    return configs


def create_detector(config: DetectorConfig) -> AnomalyDetector:
    try:
        cls = DETECTOR_CLASSES[config.family]
    except KeyError:
        raise InvalidParameterError(f"No built-in detector for family {config.family.value}")
    return cls(config)


def fit(config: DetectorConfig, train: TimeSeries) -> AnomalyDetector:
    return create_detector(config).fit(train)


def fit_pool(
    detectors: Sequence[AnomalyDetector], train: TimeSeries, *, max_workers: int = 1
) -> list[AnomalyDetector]:
    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        return list(executor.map(lambda det: det.fit(train), detectors))


def score_series(
    pool: Sequence[AnomalyDetector], series: TimeSeries, *, max_workers: int = 1
) -> np.ndarray:
    """(T, M) normalized per-timestep scores, columns in pool order."""
    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        columns = list(executor.map(lambda det: det.normalized_scores(series), pool))
    return np.column_stack(columns) if columns else np.zeros((series.length, 0))


def reduce_windows(
    timestep_scores: np.ndarray, spec: WindowSpec, reducer: Reducer = "max"
) -> np.ndarray:
    length = timestep_scores.shape[0]
    starts = window_starts(length, spec)
    if spec.width == 1 and spec.stride == 1:
        return timestep_scores
    views = np.lib.stride_tricks.sliding_window_view(timestep_scores, spec.width, axis=0)[starts]
    return views.max(axis=-1) if reducer == "max" else views.mean(axis=-1)


def score_matrix(
    pool: Sequence[AnomalyDetector],
    series: TimeSeries,
    spec: WindowSpec = WindowSpec(width=1),
    reducer: Reducer = "max",
    *,
    max_workers: int = 1,
) -> ScoreMatrix:
    timestep = score_series(pool, series, max_workers=max_workers)
    return ScoreMatrix(reduce_windows(timestep, spec, reducer), tuple(det.id for det in pool))


def expand_window_scores(scores: np.ndarray, spec: WindowSpec, length: int) -> np.ndarray:
    """Per-timestep maximum over the scores of the windows covering it."""
    expanded = np.zeros(length)
    starts = window_starts(length, spec)
    for start, value in zip(starts, scores, strict=True):
        segment = expanded[start : start + spec.width]
        np.maximum(segment, value, out=segment)
    return expanded
