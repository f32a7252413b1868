from dataclasses import dataclass, field

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from app.core.exceptions import InvalidParameterError


@dataclass(frozen=True)
class TimeSeries:
    """T timesteps by d real features, with optional 0/1 labels per timestep.

    Arrays are copied on construction, so a series never aliases its input.
    """

    name: str
    values: np.ndarray
    labels: np.ndarray | None = None

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=np.float64)
        if values.ndim == 1:
            values = values.reshape(-1, 1)
        if values.ndim != 2 or values.shape[0] < 1 or values.shape[1] < 1:
            raise InvalidParameterError(
                f"Series {self.name!r} needs a non-empty T x d matrix, got shape {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise InvalidParameterError(f"Series {self.name!r} contains non-finite values")
        object.__setattr__(self, "values", values)

        if self.labels is not None:
            labels = np.array(self.labels).reshape(-1)
            if labels.shape[0] != values.shape[0]:
                raise InvalidParameterError(
                    f"Series {self.name!r} has {values.shape[0]} rows but {labels.shape[0]} labels"
                )
            if not np.all(np.isin(labels, (0, 1))):
                raise InvalidParameterError(f"Series {self.name!r} labels must be 0 or 1")
            object.__setattr__(self, "labels", labels.astype(np.int8))

    @property
    def length(self) -> int:
        return int(self.values.shape[0])

    @property
    def dims(self) -> int:
        return int(self.values.shape[1])

    @property
    def has_labels(self) -> bool:
        return self.labels is not None

    def slice(self, start: int, stop: int) -> "TimeSeries":
        labels = None if self.labels is None else self.labels[start:stop]
        return TimeSeries(self.name, self.values[start:stop], labels)

    def with_labels(self, labels: np.ndarray | None) -> "TimeSeries":
        return TimeSeries(self.name, self.values, labels)

    def without_labels(self) -> "TimeSeries":
        return TimeSeries(self.name, self.values, None)

    def labels_or_zeros(self) -> np.ndarray:
        if self.labels is None:
            return np.zeros(self.length, dtype=np.int8)
        return self.labels.copy()


class WindowSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    width: int = Field(ge=1)
    stride: int = Field(default=1, ge=1)

    def count(self, length: int) -> int:
        if self.width > length:
            return 0
        return (length - self.width) // self.stride + 1


class SplitSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    offline_fraction: float = Field(default=0.8, gt=0, lt=1)


@dataclass(frozen=True)
class Window:
    index: int
    start: int
    series: TimeSeries = field(repr=False)

    @property
    def stop(self) -> int:
        return self.start + self.series.length
