"""Markov-chain rank aggregation over detector rankings."""

import logging
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from app.core.exceptions import InvalidRankingError
from app.models.config import RankOrientation
from app.models.ranking import AggregateResult, Ranking

logger = logging.getLogger(__name__)

RankingInput = Ranking | Sequence[str]


@dataclass(frozen=True)
class PreferenceMatrix:
    """``counts[i, j]``: how many rankings place ``ids[i]`` ahead of ``ids[j]``."""

    ids: tuple[str, ...]
    counts: np.ndarray
    rankings: int


@dataclass(frozen=True)
class TransitionMatrix:
    ids: tuple[str, ...]
    matrix: np.ndarray
    orientation: RankOrientation


@dataclass(frozen=True)
class StationaryResult:
    vector: np.ndarray
    iterations: int
    converged: bool


def _as_ids(ranking: RankingInput) -> list[str]:
    ids = list(ranking.ids) if isinstance(ranking, Ranking) else list(ranking)
    if len(set(ids)) != len(ids):
        raise InvalidRankingError(f"Duplicate ids in ranking {ids}")
    return ids


def build_counts(rankings: Sequence[RankingInput]) -> PreferenceMatrix:
    if not rankings:
        raise InvalidRankingError("Aggregation needs at least one ranking")
    lists = [_as_ids(r) for r in rankings]
    universe = tuple(sorted(set().union(*lists)))
    index = {detector_id: i for i, detector_id in enumerate(universe)}
    counts = np.zeros((len(universe), len(universe)), dtype=np.int64)
    for ids in lists:
        positions = np.array([index[i] for i in ids], dtype=np.int64)
        ahead, behind = np.triu_indices(positions.size, k=1)
        np.add.at(counts, (positions[ahead], positions[behind]), 1)
    return PreferenceMatrix(universe, counts, len(lists))


def build_transition(
    preferences: PreferenceMatrix,
    orientation: RankOrientation = RankOrientation.WINNER_MASS,
) -> TransitionMatrix:
    """Row-normalized counts with a zero diagonal; all-zero rows become uniform.

    ``literal`` normalizes the counts as they are, so mass flows from a model to
    the models it beats. ``winner_mass`` normalizes the transpose, so mass flows
    toward the models that beat it.
    """
    counts = preferences.counts.astype(np.float64)
    if orientation is RankOrientation.WINNER_MASS:
        counts = counts.T.copy()
    np.fill_diagonal(counts, 0.0)
    size = counts.shape[0]
    totals = counts.sum(axis=1, keepdims=True)
    matrix = np.divide(counts, totals, out=np.full_like(counts, 1.0 / size), where=totals > 0)
    return TransitionMatrix(preferences.ids, matrix, orientation)


def stationary(
    transition: TransitionMatrix | np.ndarray,
    tol: float = 1e-10,
    max_iter: int = 10_000,
) -> StationaryResult:
    """Power iteration v <- vP from uniform until the l1 change drops below ``tol``."""
    matrix = transition.matrix if isinstance(transition, TransitionMatrix) else np.asarray(transition)
    v = np.full(matrix.shape[0], 1.0 / matrix.shape[0])
    for iteration in range(1, max_iter + 1):
        updated = v @ matrix
        delta = float(np.abs(updated - v).sum())
        v = updated
        if delta < tol:
            return StationaryResult(v / v.sum(), iteration, True)
    logger.warning("Power iteration did not converge after %d iterations", max_iter)
    return StationaryResult(v / v.sum(), max_iter, False)


def mean_positions(rankings: Sequence[RankingInput], ids: Sequence[str]) -> dict[str, float]:
    """Mean 0-based position of each id over the rankings that contain it."""
    positions: dict[str, list[int]] = {i: [] for i in ids}
    for ranking in rankings:
        for position, detector_id in enumerate(_as_ids(ranking)):
            positions[detector_id].append(position)
    return {i: float(np.mean(p)) for i, p in positions.items()}


def aggregate(
    rankings: Sequence[RankingInput],
    orientation: RankOrientation = RankOrientation.WINNER_MASS,
    *,
    tol: float = 1e-10,
    max_iter: int = 10_000,
) -> AggregateResult:
    """Consensus ranking by descending stationary mass; ties by mean input position, then id."""
    preferences = build_counts(rankings)
    result = stationary(build_transition(preferences, orientation), tol, max_iter)
    mean_rank = mean_positions(rankings, preferences.ids)
    mass = dict(zip(preferences.ids, result.vector.tolist(), strict=True))
    order = sorted(preferences.ids, key=lambda i: (-round(mass[i], 12), mean_rank[i], i))
    return AggregateResult(
        ranking=Ranking(ids=order, scores={i: mass[i] for i in order}),
        stationary=[mass[i] for i in preferences.ids],
        iterations=result.iterations,
        converged=result.converged,
    )
