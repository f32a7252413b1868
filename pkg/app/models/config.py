import math
from enum import Enum
from pathlib import Path
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator
from typing_extensions import Self

from app.models.detector import FAMILY_PARAMS, DetectorFamily


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)


class MetaLearnerKind(str, Enum):
    LR = "lr"
    RF = "rf"
    SVM = "svm"


class RankOrientation(str, Enum):
    WINNER_MASS = "winner_mass"
    LITERAL = "literal"


LabelsMode = Literal["synthetic", "ground_truth"]


class SplitConfig(StrictModel):
    offline_fraction: float = Field(default=0.8, gt=0, lt=1)


class WindowsConfig(StrictModel):
    width: int = Field(default=1, ge=1)
    stride: int = Field(default=1, ge=1)
    reducer: Literal["max", "mean"] = "max"


class FamilyRequest(StrictModel):
    count: int = Field(default=0, ge=0)
    k: int | None = Field(default=None, ge=1)
    window: int | None = Field(default=None, ge=1)
    bins: int | None = Field(default=None, ge=2)
    components: int | None = Field(default=None, ge=1)
    trees: int | None = Field(default=None, ge=1)
    subsample: int | None = Field(default=None, ge=1)
    clusters: int | None = Field(default=None, ge=1)

    def fixed_params(self) -> dict[str, int]:
        return {
            name: value
            for name, value in self.model_dump(exclude={"count"}).items()
            if value is not None
        }


class PoolConfig(StrictModel):
    knn: FamilyRequest = Field(default_factory=lambda: FamilyRequest(count=2))
    lof: FamilyRequest = Field(default_factory=lambda: FamilyRequest(count=2))
    md: FamilyRequest = Field(default_factory=lambda: FamilyRequest(count=1))
    rm: FamilyRequest = Field(default_factory=lambda: FamilyRequest(count=1))
    hbos: FamilyRequest = Field(default_factory=lambda: FamilyRequest(count=1))
    pca: FamilyRequest = Field(default_factory=lambda: FamilyRequest(count=1))
    iforest: FamilyRequest = Field(default_factory=lambda: FamilyRequest(count=1))
    kmeans: FamilyRequest = Field(default_factory=lambda: FamilyRequest(count=1))

    @model_validator(mode="after")
    def _params_belong_to_family(self) -> Self:
        for family, request in self.requests().items():
            unknown = set(request.fixed_params()) - set(FAMILY_PARAMS[family])
            if unknown:
                raise ValueError(
                    f"pool.{family.value.lower()} does not accept {sorted(unknown)}"
                )
        return self

    def requests(self) -> dict[DetectorFamily, FamilyRequest]:
        return {
            family: getattr(self, family.value.lower())
            for family in DetectorFamily
            if family is not DetectorFamily.CUSTOM
        }


class LrParams(StrictModel):
    learning_rate: float = Field(default=0.1, gt=0)
    epochs: int = Field(default=200, ge=1)
    l2: float = Field(default=1e-4, ge=0)


class SvmParams(StrictModel):
    learning_rate: float = Field(default=0.01, gt=0)
    epochs: int = Field(default=200, ge=1)
    l2: float = Field(default=1e-3, ge=0)


class RfParams(StrictModel):
    trees: int = Field(default=50, ge=1)
    max_depth: int = Field(default=8, ge=1)
    min_leaf: int = Field(default=2, ge=1)
    # None means round-down sqrt of the feature count.
    max_features: int | None = Field(default=None, ge=1)
    bootstrap: bool = True


class MetaConfig(StrictModel):
    kind: MetaLearnerKind = MetaLearnerKind.RF
    lr: LrParams = Field(default_factory=LrParams)
    rf: RfParams = Field(default_factory=RfParams)
    svm: SvmParams = Field(default_factory=SvmParams)


class GAConfig(StrictModel):
    population: int = Field(default=20, ge=2)
    generations: int = Field(default=20, ge=1)
    mutation_rate: float = Field(default=0.1, ge=0, le=1)
    elite: int | None = Field(default=None, ge=1)
    parents: int = Field(default=2, ge=2)
    sigma: float = Field(default=1.0, ge=0, le=1)
    validation_fraction: float = Field(default=0.25, gt=0, lt=1)

    @model_validator(mode="after")
    def _elite_below_population(self) -> Self:
        if self.elite is not None and self.elite >= self.population:
            raise ValueError("ga.elite must be smaller than ga.population")
        return self

    @property
    def elite_count(self) -> int:
        if self.elite is not None:
            return self.elite
        return min(max(2, self.population // 5), self.population - 1)


class LabelsConfig(StrictModel):
    mode: LabelsMode = "synthetic"
    fraction: float = Field(default=0.1, gt=0, lt=1)
    scale_min: float = Field(default=0.5, gt=0)
    scale_max: float = Field(default=3.0, gt=0)
    context: int = Field(default=50, ge=2)

    @model_validator(mode="after")
    def _ordered_scales(self) -> Self:
        if self.scale_min > self.scale_max:
            raise ValueError("labels.scale_min must not exceed labels.scale_max")
        return self


class LinTSConfig(StrictModel):
    windows: int = Field(default=50, ge=1)
    width: int | None = Field(default=None, ge=2)
    epsilon0: float = Field(default=0.2, ge=0, le=1)
    decay: Literal["multiplicative", "exponential"] = "multiplicative"
    decay_rate: float = Field(default=0.99, gt=0, le=1)
    kappa: float = Field(default=math.log(1 / 0.99), ge=0)
    alpha: float = Field(default=0.7, ge=0, le=1)
    lambda_: float = Field(default=1.0, gt=0, alias="lambda")
    buffer: int = Field(default=5, ge=1)
    smoothing: float | None = Field(default=None, gt=0, le=1)
    auc_operand: Literal["buffer", "window"] = "buffer"


class GanConfig(StrictModel):
    epochs: int = Field(default=100, ge=1)
    batch_size: int = Field(default=64, ge=1)
    noise_dim: int = Field(default=32, ge=1)
    hidden: int = Field(default=256, ge=1)
    learning_rate: float = Field(default=1e-4, gt=0)
    beta1: float = Field(default=0.5, ge=0, lt=1)
    beta2: float = Field(default=0.999, ge=0, lt=1)
    dropout: float = Field(default=0.4, ge=0, lt=1)
    real_label: float = Field(default=0.9, ge=0, le=1)
    fake_label: float = Field(default=0.1, ge=0, le=1)
    input_noise: float = Field(default=0.05, ge=0)
    tau: float = Field(default=0.5, gt=0, lt=1)
    pool_factor: int = Field(default=10, ge=1)
    budget: float = Field(default=0.1, gt=0, lt=1)


class SbaConfig(StrictModel):
    fraction: float = Field(default=0.1, gt=0, lt=1)
    scale_min: float = Field(default=0.95, gt=0)
    scale_max: float = Field(default=1.05, gt=0)
    context: int = Field(default=50, ge=2)

    @model_validator(mode="after")
    def _ordered_scales(self) -> Self:
        if self.scale_min > self.scale_max:
            raise ValueError("sba.scale_min must not exceed sba.scale_max")
        return self


class McConfig(StrictModel):
    trials: int = Field(default=10, ge=1)
    noise: float = Field(default=0.1, ge=0)
    magnitude_min: float = Field(default=0.5, gt=0)
    magnitude_max: float = Field(default=3.0, gt=0)
    anomalies: int = Field(default=10, ge=1)
    context: int = Field(default=50, ge=2)

    @model_validator(mode="after")
    def _ordered_magnitudes(self) -> Self:
        if self.magnitude_min > self.magnitude_max:
            raise ValueError("mc.magnitude_min must not exceed mc.magnitude_max")
        return self


class RankConfig(StrictModel):
    orientation: RankOrientation = RankOrientation.WINNER_MASS
    tol: float = Field(default=1e-10, gt=0)
    max_iter: int = Field(default=10_000, ge=1)


class OnlineConfig(StrictModel):
    period: int = Field(default=5, ge=1)
    reopt: bool = True
    window_fraction: float = Field(default=0.05, gt=0, le=1)
    step_fraction: float = Field(default=0.05, gt=0, le=1)


class RunConfig(StrictModel):
    dataset: Path | None = None
    out: Path | None = None
    seed: int | None = Field(default=None, ge=0)
    split: SplitConfig = Field(default_factory=SplitConfig)
    windows: WindowsConfig = Field(default_factory=WindowsConfig)
    pool: PoolConfig = Field(default_factory=PoolConfig)
    meta: MetaConfig = Field(default_factory=MetaConfig)
    ga: GAConfig = Field(default_factory=GAConfig)
    labels: LabelsConfig = Field(default_factory=LabelsConfig)
    lints: LinTSConfig = Field(default_factory=LinTSConfig)
    gan: GanConfig = Field(default_factory=GanConfig)
    sba: SbaConfig = Field(default_factory=SbaConfig)
    mc: McConfig = Field(default_factory=McConfig)
    rank: RankConfig = Field(default_factory=RankConfig)
    online: OnlineConfig = Field(default_factory=OnlineConfig)
