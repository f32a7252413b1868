from enum import Enum
from typing import Any

from pydantic import BaseModel, Field

from app.models.ranking import Ranking


class Branch(str, Enum):
    ENSEMBLE = "ensemble"
    SINGLE = "single"


class GanEpoch(BaseModel):
    epoch: int
    d_loss: float
    g_loss: float
    heldout_d_loss: float


class InjectionRecord(BaseModel):
    test: str
    indices: list[int]
    labels: list[int]
    scales: list[float] | None = None


class EnsembleSummary(BaseModel):
    detector_ids: list[str]
    members: list[int]
    fitness: float
    f1: float
    auc_pr: float
    threshold: float
    meta: str


class SingleSummary(BaseModel):
    detector_id: str
    threshold: float
    fitness: float


class SelectionReport(BaseModel):
    seed: int
    pool: list[str]
    labels_mode: str
    threshold_policy: str = "best_f1_on_validation"
    ensemble: EnsembleSummary
    single: SingleSummary
    designated: Branch
    lints: Ranking
    gan: Ranking
    sba: Ranking
    mc: Ranking
    robustness: Ranking
    final: Ranking
    durations: dict[str, float] = Field(default_factory=dict)
    config: dict[str, Any] = Field(default_factory=dict)


class WindowDecision(BaseModel):
    window: int
    start: int
    single: list[int]
    ensemble: list[int]
    final: list[int]
    single_scores: list[float]
    ensemble_scores: list[float]
    designated: Branch
    reoptimized: bool = False


class BranchF1(BaseModel):
    single: float
    ensemble: float
    final: float


class OnlineSummary(BaseModel):
    windows: int
    window_width: int
    step: int
    reoptimizations: int
    buffer_lengths: list[int]
    f1_available: bool
    f1: BranchF1 | None = None
