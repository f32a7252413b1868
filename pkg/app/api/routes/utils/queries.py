from typing import Any

from fastapi import APIRouter

from app.api.deps import RunConfigDep
from app.core.run_config import config_echo

router = APIRouter()


@router.get("/health-check/")
async def health_check() -> bool:
    return True


@router.get("/config/")
def read_run_config(config: RunConfigDep) -> dict[str, Any]:
    """Effective run configuration behind the selection endpoint."""
    return config_echo(config)
