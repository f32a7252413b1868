"""Interleaving synthetic points into series copies, plus SBA near-threshold injection."""

import logging
import math
from dataclasses import dataclass

import numpy as np

from app.core.exceptions import InsufficientDataError, InvalidParameterError
from app.models.config import LabelsConfig, SbaConfig
from app.models.series import TimeSeries

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class InjectionResult:
    series: TimeSeries
    indices: np.ndarray
    point_labels: np.ndarray
    scales: np.ndarray | None = None

    @property
    def count(self) -> int:
        return int(self.indices.size)

    def original(self) -> TimeSeries:
        keep = np.ones(self.series.length, dtype=bool)
        keep[self.indices] = False
        labels = None if self.series.labels is None else self.series.labels[keep]
        return TimeSeries(self.series.name, self.series.values[keep], labels)


def injection_count(length: int, fraction: float) -> int:
    return math.ceil(fraction * length)


def insertion_positions(length: int, count: int) -> np.ndarray:
    """Original-sample offsets after which each point is inserted: every floor(T/B) samples."""
    if count <= 0:
        raise InvalidParameterError("Injection budget must be at least one point")
    if count > length:
        raise InvalidParameterError(f"Cannot inject {count} points into {length} samples")
    gap = length // count
    return np.minimum(np.arange(1, count + 1) * gap, length)


def inject(
    series: TimeSeries, points: np.ndarray, point_labels: np.ndarray
) -> InjectionResult:
    """Insert ``points`` at evenly spaced positions, shifting later samples.

    Original samples keep their labels (zeros when the series is unlabeled);
    inserted samples carry ``point_labels``.
    """
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    point_labels = np.asarray(point_labels).astype(np.int8).reshape(-1)
    count = points.shape[0]
    if points.shape[1] != series.dims:
        raise InvalidParameterError(f"Injected points have {points.shape[1]} features, series has {series.dims}")
    if point_labels.shape[0] != count:
        raise InvalidParameterError("Every injected point needs a label")
    offsets = insertion_positions(series.length, count)

    values = np.insert(series.values, offsets, points, axis=0)
    labels = np.insert(series.labels_or_zeros(), offsets, point_labels)
    indices = offsets + np.arange(count)
    return InjectionResult(TimeSeries(series.name, values, labels), indices, point_labels)


def context_window(length: int, position: int, width: int) -> slice:
    """The ``width`` samples before ``position``, shifted forward near the start."""
    start = max(0, min(position - width, length - width))
    return slice(start, start + width)


def sba_points(
    values: np.ndarray,
    offsets: np.ndarray,
    context: int,
    scale_min: float,
    scale_max: float,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray]:
    """Context mean plus N(0, (sigma_j * s)^2) noise with s ~ U[scale_min, scale_max]."""
    length, d = values.shape
    scales = rng.uniform(scale_min, scale_max, size=offsets.size)
    points = np.empty((offsets.size, d))
    for i, (offset, scale) in enumerate(zip(offsets, scales, strict=True)):
        window = values[context_window(length, int(offset), context)]
        points[i] = window.mean(axis=0) + rng.normal(0.0, 1.0, size=d) * window.std(axis=0) * scale
    return points, scales


def sba_augment(
    series: TimeSeries,
    config: SbaConfig | LabelsConfig,
    rng: np.random.Generator,
) -> InjectionResult:
    """Near-threshold injection; a point is labeled anomalous iff its scale exceeds 1.

    The context window is clamped to the series length.
    """
    if series.length < 2:
        raise InsufficientDataError(f"Injection needs at least 2 rows, got {series.length}")
    context = min(config.context, series.length)
    if context < config.context:
        logger.debug("Context window %d clamped to series length %d", config.context, context)
    count = injection_count(series.length, config.fraction)
    offsets = insertion_positions(series.length, count)
    points, scales = sba_points(series.values, offsets, context, config.scale_min, config.scale_max, rng)
    labels = (scales > 1.0).astype(np.int8)
    result = inject(series, points, labels)
    return InjectionResult(result.series, result.indices, labels, scales)
