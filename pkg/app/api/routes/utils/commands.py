from fastapi import APIRouter

from app.algorithms.data import synth_generate
from app.core.seeding import resolve_seed
from app.models.api import SeriesPayload, SynthRequest

router = APIRouter()


@router.post("/synth/", response_model=SeriesPayload)
def synth(request: SynthRequest) -> SeriesPayload:
    """Generate a labeled synthetic series."""
    seed = resolve_seed(request.seed)
    series = synth_generate(request.kind, request.length, request.dims, request.anomalies, seed)
    return SeriesPayload.from_series(series)
