from pydantic import BaseModel, ConfigDict, Field, model_validator
from typing_extensions import Self

from app.models.config import RankOrientation


class Ranking(BaseModel):
    """Detector ids, best first, with an optional score per id."""

    model_config = ConfigDict(frozen=True)

    ids: list[str]
    scores: dict[str, float] | None = None

    @model_validator(mode="after")
    def _unique_ids(self) -> Self:
        if len(set(self.ids)) != len(self.ids):
            raise ValueError(f"Ranking ids must be unique: {self.ids}")
        if self.scores is not None and set(self.scores) - set(self.ids):
            raise ValueError("Ranking scores reference ids outside the ranking")
        return self

    @property
    def top(self) -> str:
        return self.ids[0]

    def position(self, detector_id: str) -> int:
        return self.ids.index(detector_id)


class AggregateResult(BaseModel):
    ranking: Ranking
    stationary: list[float]
    iterations: int
    converged: bool


class AggregateRequest(BaseModel):
    rankings: list[list[str]] = Field(min_length=1)
    orientation: RankOrientation = RankOrientation.WINNER_MASS
