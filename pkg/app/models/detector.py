from enum import Enum

from pydantic import BaseModel, ConfigDict, Field, field_validator


class DetectorFamily(str, Enum):
    KNN = "KNN"
    LOF = "LOF"
    MD = "MD"
    RM = "RM"
    HBOS = "HBOS"
    PCA = "PCA"
    IFOREST = "IFOREST"
    KMEANS = "KMEANS"
    # User-supplied AnomalyDetector subclasses; never drawn by build_pool.
    CUSTOM = "CUSTOM"


# Draw ranges per family parameter; ``None`` as the upper bound means "up to d".
FAMILY_PARAMS: dict[DetectorFamily, dict[str, tuple[int, int | None]]] = {
    DetectorFamily.KNN: {"k": (3, 50)},
    DetectorFamily.LOF: {"k": (3, 50)},
    DetectorFamily.MD: {},
    DetectorFamily.RM: {"window": (5, 100)},
    DetectorFamily.HBOS: {"bins": (5, 50)},
    DetectorFamily.PCA: {"components": (1, None)},
    DetectorFamily.IFOREST: {"trees": (50, 150), "subsample": (64, 256)},
    DetectorFamily.KMEANS: {"clusters": (2, 10)},
    DetectorFamily.CUSTOM: {},
}


class DetectorConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    id: str = Field(min_length=1)
    family: DetectorFamily
    params: dict[str, int] = Field(default_factory=dict)
    seed: int = Field(default=0, ge=0)

    @field_validator("params")
    @classmethod
    def _positive_params(cls, value: dict[str, int]) -> dict[str, int]:
        for name, param in value.items():
            if param < 1:
                raise ValueError(f"Parameter {name} must be >= 1, got {param}")
        if "bins" in value and value["bins"] < 2:
            raise ValueError("HBOS bins must be >= 2")
        return value

    def param(self, name: str, default: int) -> int:
        return self.params.get(name, default)
