import copy
import logging
import time
from collections.abc import Iterator, Sequence
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np

from app.algorithms.data import chronological_folds, split_offline_online, window_labels, window_starts
from app.algorithms.detectors.base import AnomalyDetector
from app.algorithms.detectors.pool import build_pool, create_detector, fit_pool, score_matrix
from app.algorithms.ga_ens import GAFolds, GAResult, SubsetEvaluator, run_ga
from app.algorithms.lints import LinTSResult, run_lints
from app.algorithms.metrics import auc_pr_or_zero, best_f1_threshold
from app.algorithms.online import DeployedEnsemble, DeployedSingle, Selection
from app.algorithms.perturb.injection import sba_augment
from app.algorithms.perturb.robustness import RobustnessResult, robustness_rankings
from app.algorithms.rank import aggregate
from app.core.config import settings
from app.core.exceptions import InvalidParameterError, StageFailedError
from app.core.records import RecordWriter
from app.core.run_config import config_echo
from app.core.seeding import derive_rng, resolve_seed
from app.models.config import RunConfig
from app.models.ensemble import FitnessRecord, Subset
from app.models.report import EnsembleSummary, SelectionReport, SingleSummary
from app.models.scores import LabeledScores
from app.models.series import SplitSpec, TimeSeries, WindowSpec

logger = logging.getLogger(__name__)


@dataclass
class OfflineSelection:
    report: SelectionReport
    selection: Selection
    pool: list[AnomalyDetector]
    ga: GAResult | None = None
    lints: LinTSResult | None = None
    robustness: RobustnessResult | None = None
    offline: TimeSeries | None = None
    online: TimeSeries | None = None
    durations: dict[str, float] = field(default_factory=dict)


class SelectionService:
    """Offline model selection: ensemble branch, single-model branch and their fusion."""

    def __init__(
        self,
        config: RunConfig,
        *,
        writer: RecordWriter | None = None,
        max_workers: int | None = None,
    ) -> None:
        self.config = config
        self.writer = writer or RecordWriter()
        self.max_workers = max_workers or settings.MAX_WORKERS
        self.seed = resolve_seed(config.seed)

    def split(self, series: TimeSeries) -> tuple[TimeSeries, TimeSeries]:
        return split_offline_online(series, SplitSpec(offline_fraction=self.config.split.offline_fraction))

    def run_offline(
        self, series: TimeSeries, *, detectors: Sequence[AnomalyDetector] | None = None
    ) -> OfflineSelection:
        offline, online = self.split(series)
        result = self.select(offline, seed=self.seed, detectors=detectors)
        result.offline, result.online = offline, online
        self.writer.write("report", [result.report])
        if result.ga is not None:
            self.writer.write("ga_history", result.ga.history)
        if result.robustness is not None:
            self.writer.write("gan_history", result.robustness.gan_history)
            self.writer.write("injections", result.robustness.injections)
        return result

    def redact(self, series: TimeSeries) -> TimeSeries:
        """Ground truth reaches the selection stages only in ``ground_truth`` mode."""
        if self.config.labels.mode == "ground_truth":
            if not series.has_labels:
                raise InvalidParameterError("labels.mode = ground_truth needs a labeled dataset")
            return series
        return series.without_labels()

    def make_pool(
        self, series: TimeSeries, seed: int, detectors: Sequence[AnomalyDetector] | None
    ) -> list[AnomalyDetector]:
        if detectors is not None:
            if not detectors:
                raise InvalidParameterError("An explicit detector pool cannot be empty")
            return [copy.deepcopy(det) for det in detectors]
        configs = build_pool(self.config.pool.requests(), seed, n_features=series.dims)
        return [create_detector(c) for c in configs]

    def labeled_fold(self, fold: TimeSeries, seed: int, key: str) -> TimeSeries:
        """The fold itself in ground-truth mode, an SBA-injected copy otherwise."""
        if fold.has_labels:
            return fold
        return sba_augment(fold, self.config.labels, derive_rng(seed, "labels", key)).series

    def labeled_scores(self, pool: Sequence[AnomalyDetector], fold: TimeSeries) -> LabeledScores:
        spec = WindowSpec(width=self.config.windows.width, stride=self.config.windows.stride)
        matrix = score_matrix(pool, fold, spec, self.config.windows.reducer, max_workers=self.max_workers)
        starts = window_starts(fold.length, spec)
        return LabeledScores(matrix, window_labels(fold.labels_or_zeros(), starts, spec.width))

    def ga_folds(
        self, pool: Sequence[AnomalyDetector], train: TimeSeries, validation: TimeSeries, seed: int
    ) -> GAFolds:
        return GAFolds(
            train=self.labeled_scores(pool, self.labeled_fold(train, seed, "train")),
            validation=self.labeled_scores(pool, self.labeled_fold(validation, seed, "validation")),
        )

    def select(
        self,
        offline: TimeSeries,
        *,
        seed: int,
        detectors: Sequence[AnomalyDetector] | None = None,
    ) -> OfflineSelection:
        durations: dict[str, float] = {}
        config = self.config
        working = self.redact(offline)

        with self._stage("pool", durations):
            train, validation = chronological_folds(working, config.ga.validation_fraction)
            pool = fit_pool(self.make_pool(working, seed, detectors), train, max_workers=self.max_workers)
            ids = [det.id for det in pool]

        with self._stage("ensemble", durations):
            folds = self.ga_folds(pool, train, validation, seed)
            evaluator = SubsetEvaluator(folds, config.meta, seed=seed, sigma=config.ga.sigma)
            ga: GAResult | None = None
            if len(pool) >= 2:
                ga = run_ga(config.ga, evaluator, seed)
                subset, record = ga.best, ga.record
            else:
                subset = Subset.of([0], 1)
                record = evaluator.evaluate(subset)
            meta = evaluator.train(subset)

        with ThreadPoolExecutor(max_workers=2) as executor:
            lints_future = executor.submit(self._run_lints, pool, working, seed, durations)
            robust_future = executor.submit(self._run_robustness, pool, working, seed, durations)
            lints_result = lints_future.result()
            robustness = robust_future.result()

        with self._stage("aggregate", durations):
            rank = config.rank
            consensus = aggregate(robustness.rankings, rank.orientation, tol=rank.tol, max_iter=rank.max_iter)
            final = aggregate(
                [consensus.ranking, lints_result.ranking], rank.orientation, tol=rank.tol, max_iter=rank.max_iter
            )

        with self._stage("designate", durations):
            top = final.ranking.top
            single_threshold, single_fitness = self._single_fitness(folds.validation, top)
            single = DeployedSingle(pool[ids.index(top)], single_threshold, single_fitness)
            ensemble = DeployedEnsemble(
                detectors=[pool[i] for i in subset.members],
                meta=meta,
                threshold=record.threshold,
                fitness=record.fitness,
                scoring=WindowSpec(width=config.windows.width, stride=config.windows.stride),
                reducer=config.windows.reducer,
            )
            selection = Selection.designate(ensemble, single)

        report = SelectionReport(
            seed=seed,
            pool=ids,
            labels_mode=config.labels.mode,
            ensemble=self._ensemble_summary(record),
            single=SingleSummary(detector_id=top, threshold=single_threshold, fitness=single_fitness),
            designated=selection.designated,
            lints=lints_result.ranking,
            gan=robustness.gan,
            sba=robustness.sba,
            mc=robustness.mc,
            robustness=consensus.ranking,
            final=final.ranking,
            durations=durations,
            config=config_echo(config),
        )
        logger.info(
            "Selection done: ensemble=%s (%.4f) single=%s (%.4f) designated=%s",
            record.detector_ids,
            record.fitness,
            top,
            single_fitness,
            selection.designated.value,
        )
        return OfflineSelection(
            report=report,
            selection=selection,
            pool=pool,
            ga=ga,
            lints=lints_result,
            robustness=robustness,
            durations=durations,
        )

    def _run_lints(
        self, pool: Sequence[AnomalyDetector], series: TimeSeries, seed: int, durations: dict[str, float]
    ) -> LinTSResult:
        with self._stage("lints", durations):
            return run_lints(self.config.lints, pool, series, self.config.labels, seed)

    def _run_robustness(
        self, pool: Sequence[AnomalyDetector], series: TimeSeries, seed: int, durations: dict[str, float]
    ) -> RobustnessResult:
        with self._stage("robustness", durations):
            return robustness_rankings(
                pool,
                series,
                gan=self.config.gan,
                sba=self.config.sba,
                mc=self.config.mc,
                seed=seed,
                max_workers=min(3, self.max_workers),
            )

    def _single_fitness(self, validation: LabeledScores, detector_id: str) -> tuple[float, float]:
        scores = validation.matrix.column(detector_id)
        threshold, f1 = best_f1_threshold(scores, validation.labels)
        sigma = self.config.ga.sigma
        fitness = sigma * f1 + (1 - sigma) * auc_pr_or_zero(scores, validation.labels)
        return threshold, float(np.clip(fitness, 0.0, 1.0))

    def _ensemble_summary(self, record: FitnessRecord) -> EnsembleSummary:
        return EnsembleSummary(
            detector_ids=record.detector_ids,
            members=record.members,
            fitness=record.fitness,
            f1=record.f1,
            auc_pr=record.auc_pr,
            threshold=record.threshold,
            meta=self.config.meta.kind.value,
        )

    @staticmethod
    @contextmanager
    def _stage(name: str, durations: dict[str, float]) -> Iterator[None]:
        started = time.perf_counter()
        logger.info("Stage %s started", name)
        try:
            yield
        except StageFailedError:
            raise
        except Exception as exc:
            logger.exception("Stage %s failed", name)
            raise StageFailedError(name, exc) from exc
        finally:
            durations[name] = time.perf_counter() - started
        logger.info("Stage %s finished in %.3fs", name, durations[name])
