import logging
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from app.algorithms.detectors.base import AnomalyDetector
from app.algorithms.metrics import auc_pr_or_zero, best_f1_threshold
from app.algorithms.perturb.gan import GanInjection, gan_augment
from app.algorithms.perturb.injection import InjectionResult, sba_augment
from app.algorithms.perturb.mc import McResult, rank_by_f1, run_mc
from app.core.seeding import derive_rng
from app.models.config import GanConfig, McConfig, SbaConfig
from app.models.ranking import Ranking
from app.models.report import GanEpoch, InjectionRecord
from app.models.series import TimeSeries

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RobustnessResult:
    gan: Ranking
    sba: Ranking
    mc: Ranking
    gan_history: list[GanEpoch]
    injections: list[InjectionRecord]

    @property
    def rankings(self) -> list[Ranking]:
        return [self.gan, self.sba, self.mc]


def scores_on_copy(
    pool: Sequence[AnomalyDetector], augmented: TimeSeries
) -> tuple[np.ndarray, np.ndarray]:
    """Best-threshold F1 and AUC-PR of every (already fitted) detector against the copy's labels."""
    labels = augmented.labels_or_zeros()
    f1 = np.zeros(len(pool))
    auc = np.zeros(len(pool))
    for m, det in enumerate(pool):
        scores = det.normalized_scores(augmented)
        f1[m] = best_f1_threshold(scores, labels)[1]
        auc[m] = auc_pr_or_zero(scores, labels)
    return f1, auc


def _record(test: str, injection: InjectionResult) -> InjectionRecord:
    return InjectionRecord(
        test=test,
        indices=[int(i) for i in injection.indices],
        labels=[int(y) for y in injection.point_labels],
        scales=None if injection.scales is None else [float(s) for s in injection.scales],
    )


def robustness_rankings(
    pool: Sequence[AnomalyDetector],
    series: TimeSeries,
    *,
    gan: GanConfig,
    sba: SbaConfig,
    mc: McConfig,
    seed: int,
    max_workers: int = 3,
) -> RobustnessResult:
    """GAN, SBA and Monte-Carlo rankings, each computed on its own copy of ``series``.

    ``series`` carries ground truth only in oracle mode; otherwise positions
    that were not injected count as normal. Detectors are never refit.
    """
    ids = [det.id for det in pool]

    def gan_test() -> GanInjection:
        return gan_augment(series, gan, derive_rng(seed, "robustness", "gan"))

    def sba_test() -> InjectionResult:
        return sba_augment(series, sba, derive_rng(seed, "robustness", "sba"))

    def mc_test() -> McResult:
        return run_mc(pool, series, mc, seed)

    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        gan_future = executor.submit(gan_test)
        sba_future = executor.submit(sba_test)
        mc_future = executor.submit(mc_test)
        gan_result = gan_future.result()
        sba_result = sba_future.result()
        mc_result = mc_future.result()

    gan_ranking = rank_by_f1(ids, *scores_on_copy(pool, gan_result.injection.series))
    sba_ranking = rank_by_f1(ids, *scores_on_copy(pool, sba_result.series))
    logger.info(
        "Robustness rankings: gan=%s sba=%s mc=%s",
        gan_ranking.ids,
        sba_ranking.ids,
        mc_result.ranking.ids,
    )
    return RobustnessResult(
        gan=gan_ranking,
        sba=sba_ranking,
        mc=mc_result.ranking,
        gan_history=gan_result.history,
        injections=[_record("gan", gan_result.injection), _record("sba", sba_result)],
    )
