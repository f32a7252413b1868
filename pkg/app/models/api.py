from typing import Literal

from pydantic import BaseModel, Field

from app.models.series import TimeSeries


class SeriesPayload(BaseModel):
    name: str = "series"
    values: list[list[float]] = Field(min_length=1)
    labels: list[int] | None = None

    def to_series(self) -> TimeSeries:
        return TimeSeries(self.name, self.values, self.labels)

    @classmethod
    def from_series(cls, series: TimeSeries) -> "SeriesPayload":
        return cls(
            name=series.name,
            values=series.values.tolist(),
            labels=None if series.labels is None else series.labels.tolist(),
        )


class SynthRequest(BaseModel):
    kind: Literal["point", "contextual", "collective"] = "point"
    length: int = Field(default=1000, ge=100)
    dims: int = Field(default=1, ge=1)
    anomalies: int = Field(default=10, ge=0)
    seed: int | None = Field(default=None, ge=0)


class SelectionRequest(BaseModel):
    series: SeriesPayload
    overrides: dict[str, str] = Field(default_factory=dict)
