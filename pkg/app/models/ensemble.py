from collections.abc import Iterable, Sequence
from dataclasses import dataclass

from pydantic import BaseModel, Field

from app.core.exceptions import InvalidParameterError


@dataclass(frozen=True, order=True)
class Subset:
    """Non-empty set of pool indices, stored as a bit mask."""

    mask: int
    pool_size: int

    def __post_init__(self) -> None:
        if self.mask <= 0:
            raise InvalidParameterError("A subset must contain at least one detector")
        if self.mask >> self.pool_size:
            raise InvalidParameterError(f"Subset mask {self.mask:b} exceeds pool size {self.pool_size}")

    @classmethod
    def of(cls, members: Iterable[int], pool_size: int) -> "Subset":
        mask = 0
        for index in members:
            if not 0 <= index < pool_size:
                raise InvalidParameterError(f"Index {index} outside pool of {pool_size}")
            mask |= 1 << index
        return cls(mask, pool_size)

    @property
    def members(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.pool_size) if self.mask >> i & 1)

    def __contains__(self, index: object) -> bool:
        return isinstance(index, int) and 0 <= index < self.pool_size and bool(self.mask >> index & 1)

    def __len__(self) -> int:
        return bin(self.mask).count("1")

    def ids(self, detector_ids: Sequence[str]) -> list[str]:
        return [detector_ids[i] for i in self.members]


class FitnessRecord(BaseModel):
    members: list[int]
    detector_ids: list[str]
    f1: float = Field(ge=0, le=1)
    auc_pr: float = Field(ge=0, le=1)
    fitness: float = Field(ge=0, le=1)
    threshold: float
    generation: int = 0


class GenerationSummary(BaseModel):
    generation: int
    best_fitness: float
    mean_fitness: float
    best_subset_ids: list[str]
    evaluations: int
