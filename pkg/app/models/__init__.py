from app.models.api import SelectionRequest, SeriesPayload, SynthRequest
from app.models.config import MetaLearnerKind, RankOrientation, RunConfig
from app.models.detector import DetectorConfig, DetectorFamily
from app.models.ensemble import FitnessRecord, GenerationSummary, Subset
from app.models.ranking import AggregateRequest, AggregateResult, Ranking
from app.models.report import (
    Branch,
    GanEpoch,
    InjectionRecord,
    OnlineSummary,
    SelectionReport,
    WindowDecision,
)
from app.models.scores import LabeledScores, ScoreMatrix
from app.models.series import SplitSpec, TimeSeries, Window, WindowSpec

__all__ = [
    "AggregateRequest",
    "AggregateResult",
    "Branch",
    "DetectorConfig",
    "DetectorFamily",
    "FitnessRecord",
    "GanEpoch",
    "GenerationSummary",
    "InjectionRecord",
    "LabeledScores",
    "MetaLearnerKind",
    "OnlineSummary",
    "RankOrientation",
    "Ranking",
    "RunConfig",
    "ScoreMatrix",
    "SelectionReport",
    "SelectionRequest",
    "SeriesPayload",
    "SplitSpec",
    "Subset",
    "SynthRequest",
    "TimeSeries",
    "Window",
    "WindowDecision",
    "WindowSpec",
]
