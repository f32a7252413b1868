from fastapi import APIRouter

from app.api.deps import run_config_with
from app.models.api import SelectionRequest
from app.models.report import SelectionReport
from app.services.selection import SelectionService

router = APIRouter()


@router.post("/", response_model=SelectionReport)
def run_selection(request: SelectionRequest) -> SelectionReport:
    """Run offline selection on the posted series; records stay in memory."""
    service = SelectionService(run_config_with(request.overrides))
    return service.run_offline(request.series.to_series()).report
