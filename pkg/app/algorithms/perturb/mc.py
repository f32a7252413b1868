"""Monte-Carlo stress trials: random anomalies on noisy copies, F1 averaged per detector."""

import logging
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from app.algorithms.detectors.base import AnomalyDetector
from app.algorithms.metrics import auc_pr_or_zero, best_f1_threshold
from app.algorithms.perturb.injection import context_window
from app.core.seeding import derive_rng
from app.models.config import McConfig
from app.models.ranking import Ranking
from app.models.series import TimeSeries

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class McTrial:
    series: TimeSeries
    positions: np.ndarray
    magnitudes: np.ndarray


@dataclass(frozen=True)
class McResult:
    ranking: Ranking
    trial_f1: np.ndarray
    trial_auc: np.ndarray
    trials: list[McTrial]

    @property
    def mean_f1(self) -> np.ndarray:
        return self.trial_f1.mean(axis=0)


def mc_trial(series: TimeSeries, config: McConfig, rng: np.random.Generator) -> McTrial:
    """One noisy copy with anomalies replacing values at random positions.

    Background noise is N(0, noise^2) on every value; each anomaly adds
    +-s times the trailing-context std of every feature, s in the magnitude
    range. Flat contexts use a unit std.
    """
    values = series.values.copy()
    length = series.length
    values += rng.normal(0.0, config.noise, size=values.shape)

    count = min(config.anomalies, length)
    positions = np.sort(rng.choice(length, size=count, replace=False))
    magnitudes = rng.uniform(config.magnitude_min, config.magnitude_max, size=count)
    signs = rng.choice((-1.0, 1.0), size=count)
    for position, magnitude, sign in zip(positions, magnitudes, signs, strict=True):
        local = series.values[context_window(length, int(position), config.context)].std(axis=0)
        local = np.where(local > 0, local, 1.0)
        values[position] = series.values[position] + sign * magnitude * local

    labels = series.labels_or_zeros()
    labels[positions] = 1
    return McTrial(TimeSeries(series.name, values, labels), positions, magnitudes)


def rank_by_f1(ids: Sequence[str], f1: np.ndarray, auc: np.ndarray | None = None) -> Ranking:
    """Descending F1, ties by descending AUC-PR, then pool order."""
    f1 = np.asarray(f1, dtype=np.float64)
    auc = np.zeros_like(f1) if auc is None else np.asarray(auc, dtype=np.float64)
    order = np.lexsort((np.arange(f1.size), -auc, -f1))
    return Ranking(ids=[ids[i] for i in order], scores={ids[i]: float(f1[i]) for i in order})


def run_mc(
    pool: Sequence[AnomalyDetector], series: TimeSeries, config: McConfig, seed: int
) -> McResult:
    ids = [det.id for det in pool]
    trial_f1 = np.zeros((config.trials, len(pool)))
    trial_auc = np.zeros_like(trial_f1)
    trials = []
    for r in range(config.trials):
        trial = mc_trial(series, config, derive_rng(seed, "mc", r))
        trials.append(trial)
        assert trial.series.labels is not None
        for m, det in enumerate(pool):
            scores = det.normalized_scores(trial.series)
            _, trial_f1[r, m] = best_f1_threshold(scores, trial.series.labels)
            trial_auc[r, m] = auc_pr_or_zero(scores, trial.series.labels)
    ranking = rank_by_f1(ids, trial_f1.mean(axis=0), trial_auc.mean(axis=0))
    result = McResult(ranking, trial_f1, trial_auc, trials)
    logger.debug("Monte-Carlo ranking over %d trials: %s", config.trials, result.ranking.ids)
    return result
