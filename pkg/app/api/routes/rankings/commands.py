from fastapi import APIRouter

from app.algorithms.rank import aggregate
from app.api.deps import RunConfigDep
from app.models.ranking import AggregateRequest, AggregateResult

router = APIRouter()


@router.post("/aggregate", response_model=AggregateResult)
def aggregate_rankings(request: AggregateRequest, config: RunConfigDep) -> AggregateResult:
    """Fuse rankings into a consensus by Markov-chain aggregation."""
    return aggregate(
        request.rankings,
        request.orientation,
        tol=config.rank.tol,
        max_iter=config.rank.max_iter,
    )
