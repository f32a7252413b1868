"""Ingestion, splitting, windowing and synthetic series generation."""

import logging
import math
from pathlib import Path
from typing import Literal

import numpy as np
import pandas as pd

from app.core.exceptions import (
    DataFormatError,
    InsufficientDataError,
    InvalidParameterError,
    ResourceNotFoundError,
)
from app.core.seeding import derive_rng
from app.models.series import SplitSpec, TimeSeries, Window, WindowSpec

logger = logging.getLogger(__name__)

LABEL_COLUMN = "label"

AnomalyKind = Literal["point", "contextual", "collective"]

MIN_SYNTH_LENGTH = 100
_CONTEXTUAL_SPAN = 5
_COLLECTIVE_SPAN = 20
_EDGE_MARGIN = 10


def load_csv(path: Path, *, label_column: str = LABEL_COLUMN) -> TimeSeries:
    """Read a header-first CSV; every column except ``label_column`` is a feature.

    Reported row numbers count data rows from 1 (the header is not a row).
    """
    if not path.is_file():
        raise ResourceNotFoundError("Dataset file", path)
    try:
        frame = pd.read_csv(
            path, dtype=str, keep_default_na=False, skip_blank_lines=True, encoding="utf-8"
        )
    except pd.errors.EmptyDataError:
        raise DataFormatError(f"{path}: file is empty")
    except pd.errors.ParserError as exc:
        raise DataFormatError(f"{path}: ragged rows ({exc})")
    except UnicodeDecodeError as exc:
        raise DataFormatError(f"{path}: not UTF-8 text ({exc.reason} at byte {exc.start})")

    if frame.shape[0] == 0:
        raise DataFormatError(f"{path}: no data rows")
    if frame.isna().to_numpy().any():
        row = int(np.flatnonzero(frame.isna().any(axis=1).to_numpy())[0]) + 1
        raise DataFormatError(f"{path}: ragged row {row}", row=row)

    feature_columns = [c for c in frame.columns if c != label_column]
    if not feature_columns:
        raise DataFormatError(f"{path}: no feature columns")

    numeric = frame.apply(lambda col: pd.to_numeric(col.str.strip(), errors="coerce"))
    bad = numeric.isna().to_numpy() | ~np.isfinite(numeric.to_numpy(dtype=float))
    if bad.any():
        row_idx, col_idx = (int(i[0]) for i in np.nonzero(bad))
        column = str(frame.columns[col_idx])
        raise DataFormatError(
            f"{path}: non-numeric value {frame.iat[row_idx, col_idx]!r} "
            f"at row {row_idx + 1}, column {column}",
            row=row_idx + 1,
            column=column,
        )

    labels = None
    if label_column in frame.columns:
        raw_labels = numeric[label_column].to_numpy()
        invalid = np.flatnonzero(~np.isin(raw_labels, (0, 1)))
        if invalid.size:
            row = int(invalid[0]) + 1
            raise DataFormatError(
                f"{path}: label value {raw_labels[invalid[0]]!r} at row {row} is not 0 or 1",
                row=row,
                column=label_column,
            )
        labels = raw_labels.astype(np.int8)

    values = numeric[feature_columns].to_numpy(dtype=np.float64)
    logger.info("Loaded %s: T=%d d=%d labels=%s", path, values.shape[0], values.shape[1], labels is not None)
    return TimeSeries(path.stem, values, labels)


def write_csv(series: TimeSeries, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(series.values, columns=[f"f{j}" for j in range(series.dims)])
    if series.labels is not None:
        frame[LABEL_COLUMN] = series.labels.astype(int)
    frame.to_csv(path, index=False, float_format="%.10g")
    return path


def window_starts(length: int, spec: WindowSpec) -> np.ndarray:
    if spec.width > length:
        raise InsufficientDataError(f"Window width {spec.width} exceeds series length {length}")
    return np.arange(spec.count(length)) * spec.stride


def segment(series: TimeSeries, spec: WindowSpec) -> list[Window]:
    starts = window_starts(series.length, spec)
    return [
        Window(index=i, start=int(start), series=series.slice(int(start), int(start) + spec.width))
        for i, start in enumerate(starts)
    ]


def window_labels(labels: np.ndarray, starts: np.ndarray, width: int) -> np.ndarray:
    """A window is anomalous iff any of its timesteps is."""
    if starts.size == 0:
        return np.zeros(0, dtype=np.int8)
    covered = np.lib.stride_tricks.sliding_window_view(labels, width)[starts]
    return covered.max(axis=1).astype(np.int8)


def split_offline_online(
    series: TimeSeries, spec: SplitSpec = SplitSpec()
) -> tuple[TimeSeries, TimeSeries]:
    cut = math.floor(spec.offline_fraction * series.length)
    if cut < 1 or series.length - cut < 1:
        raise InsufficientDataError(
            f"Series of length {series.length} cannot be split at fraction {spec.offline_fraction}"
        )
    return series.slice(0, cut), series.slice(cut, series.length)


def chronological_folds(
    series: TimeSeries, validation_fraction: float
) -> tuple[TimeSeries, TimeSeries]:
    """Train fold then validation fold (the last ``validation_fraction`` of rows)."""
    cut = series.length - math.ceil(validation_fraction * series.length)
    if cut < 1 or cut >= series.length:
        raise InsufficientDataError(
            f"Series of length {series.length} is too short for a validation fold"
        )
    return series.slice(0, cut), series.slice(cut, series.length)


def _base_signal(
    rng: np.random.Generator, length: int, d: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    t = np.arange(length, dtype=np.float64)
    amplitude = rng.uniform(1.0, 2.0, size=d)
    period = rng.uniform(20.0, 60.0, size=d)
    phase = rng.uniform(0.0, 2 * np.pi, size=d)
    clean = amplitude * np.sin(2 * np.pi * t[:, None] / period + phase)
    noise = rng.normal(0.0, 0.1, size=(length, d))
    return clean + noise, amplitude, period, phase


def _place_segments(
    rng: np.random.Generator, length: int, count: int, span: int
) -> np.ndarray:
    """Non-overlapping segment starts separated by at least ``span`` samples."""
    slot = 2 * span + 1
    usable = length - 2 * _EDGE_MARGIN
    capacity = usable // slot
    if count > capacity:
        raise InvalidParameterError(
            f"Cannot place {count} anomalies of span {span} in a series of length {length} "
            f"(capacity {capacity})"
        )
    if count == 0:
        return np.zeros(0, dtype=np.int64)
    slots = np.sort(rng.choice(capacity, size=count, replace=False))
    jitter = rng.integers(0, span + 1, size=count)
    return _EDGE_MARGIN + slots * slot + jitter


def _local_std(values: np.ndarray, position: int, radius: int = 25) -> np.ndarray:
    lo, hi = max(0, position - radius), min(values.shape[0], position + radius + 1)
    neighbours = np.delete(values[lo:hi], position - lo, axis=0)
    return np.maximum(neighbours.std(axis=0), 1e-3)


def synth_generate(
    kind: AnomalyKind,
    length: int,
    d: int,
    anomaly_count: int,
    seed: int,
    *,
    name: str | None = None,
) -> TimeSeries:
    """Sinusoid-plus-noise series with labeled point, contextual or collective anomalies."""
    if length < MIN_SYNTH_LENGTH:
        raise InvalidParameterError(f"Synthetic length must be >= {MIN_SYNTH_LENGTH}, got {length}")
    if d < 1 or anomaly_count < 0:
        raise InvalidParameterError("Synthetic series need d >= 1 and anomaly_count >= 0")

    rng = derive_rng(seed, "synth", kind, length, d)
    values, amplitude, period, phase = _base_signal(rng, length, d)
    labels = np.zeros(length, dtype=np.int8)
    t = np.arange(length, dtype=np.float64)

    if kind == "point":
        for position in _place_segments(rng, length, anomaly_count, 1):
            feature = int(rng.integers(d))
            magnitude = rng.uniform(6.0, 8.0) * _local_std(values, int(position))[feature]
            values[position, feature] += rng.choice((-1.0, 1.0)) * magnitude
            labels[position] = 1
    elif kind == "contextual":
        for start in _place_segments(rng, length, anomaly_count, _CONTEXTUAL_SPAN):
            span = slice(int(start), int(start) + _CONTEXTUAL_SPAN)
            # Half-period phase shift: values stay inside the global range.
            shifted = np.sin(2 * np.pi * t[span, None] / period + phase + np.pi)
            values[span] = amplitude * shifted + rng.normal(0.0, 0.1, size=(_CONTEXTUAL_SPAN, d))
            labels[span] = 1
    elif kind == "collective":
        for start in _place_segments(rng, length, anomaly_count, _COLLECTIVE_SPAN):
            span = slice(int(start), int(start) + _COLLECTIVE_SPAN)
            if rng.random() < 0.5:
                values[span] = values[span].mean(axis=0)
            else:
                fast = np.sin(6 * np.pi * t[span, None] / period + phase)
                values[span] = 1.5 * fast + rng.normal(0.0, 0.1, size=(_COLLECTIVE_SPAN, d))
            labels[span] = 1
    else:
        raise InvalidParameterError(f"Unknown anomaly kind {kind!r}")

    return TimeSeries(name or f"synth_{kind}_{seed}", values, labels)


def inject_regime_shift(
    series: TimeSeries, at: int, *, level: float = 3.0, scale: float = 1.5
) -> TimeSeries:
    """Shift rows ``at:`` by ``level`` feature standard deviations and rescale around the new mean."""
    if not 0 < at < series.length:
        raise InvalidParameterError(f"Shift position {at} outside (0, {series.length})")
    values = series.values.copy()
    std = np.maximum(values[:at].std(axis=0), 1e-6)
    mean = values[:at].mean(axis=0)
    values[at:] = mean + (values[at:] - mean) * scale + level * std
    return TimeSeries(series.name, values, series.labels)
