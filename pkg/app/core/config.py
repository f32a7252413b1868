from pathlib import Path
from typing import Literal

from pydantic import AliasChoices, Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_file=".env",
        env_ignore_empty=True,
        extra="ignore",
    )
    PROJECT_NAME: str = "tsad-selector"
    API_V1_STR: str = "/api/v1"
    ENVIRONMENT: Literal["local", "staging", "production"] = "local"
    LOG_LEVEL: Literal["DEBUG", "INFO", "WARNING", "ERROR"] = "INFO"

    # Seed fallback when neither the CLI nor the config file provide one.
    # TSAD_SEED is still read as an older spelling.
    RAMSES_SEED: int | None = Field(
        default=None, validation_alias=AliasChoices("RAMSES_SEED", "TSAD_SEED")
    )
    OUTPUT_DIR: Path = Path("runs")
    MAX_WORKERS: int = 4
    # Run config used by the HTTP surface; model defaults when unset.
    CONFIG_PATH: Path | None = None


settings = Settings()
