from collections.abc import Mapping
from typing import Annotated

from fastapi import Depends

from app.core.config import settings
from app.core.run_config import load_run_config
from app.models.config import RunConfig


def get_run_config() -> RunConfig:
    return load_run_config(settings.CONFIG_PATH)


def run_config_with(overrides: Mapping[str, str]) -> RunConfig:
    return load_run_config(settings.CONFIG_PATH, overrides)


RunConfigDep = Annotated[RunConfig, Depends(get_run_config)]
