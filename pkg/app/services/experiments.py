import logging
from collections.abc import Sequence
from typing import Any

from pydantic import BaseModel

from app.algorithms.data import chronological_folds, inject_regime_shift
from app.algorithms.detectors.base import AnomalyDetector
from app.algorithms.detectors.pool import fit_pool
from app.algorithms.ga_ens import GAFolds, SubsetEvaluator, run_ga
from app.algorithms.metrics import event_f1
from app.algorithms.online import timestep_decisions
from app.core.exceptions import InvalidParameterError
from app.core.records import RecordWriter
from app.models.config import MetaConfig, MetaLearnerKind, RunConfig
from app.models.series import TimeSeries
from app.services.selection import SelectionService
from app.services.streaming import StreamingService

logger = logging.getLogger(__name__)

EXPERIMENTS = ("ga-grid", "mutation", "meta", "adaptation")


class GridRow(BaseModel):
    population: int
    generations: int
    mutation_rate: float
    meta: str
    best_fitness: float
    evaluations: int
    best_subset_ids: list[str]


class AdaptationRow(BaseModel):
    seed: int
    shift_at: int
    f1_reopt: float
    f1_static: float


class ExperimentService:
    """Parameter sweeps over one fixed GA instance, and paired re-optimization runs."""

    def __init__(self, config: RunConfig, *, writer: RecordWriter | None = None) -> None:
        self.config = config
        self.writer = writer or RecordWriter()
        self.selection = SelectionService(config, writer=RecordWriter())

    def ga_instance(
        self, series: TimeSeries, detectors: Sequence[AnomalyDetector] | None = None
    ) -> GAFolds:
        service = self.selection
        offline, _ = service.split(series)
        working = service.redact(offline)
        train, validation = chronological_folds(working, self.config.ga.validation_fraction)
        pool = fit_pool(service.make_pool(working, service.seed, detectors), train)
        return service.ga_folds(pool, train, validation, service.seed)

    def _sweep(
        self,
        folds: GAFolds,
        *,
        populations: Sequence[int],
        generations: Sequence[int],
        mutation_rates: Sequence[float],
        metas: Sequence[MetaLearnerKind],
    ) -> list[GridRow]:
        rows = []
        for kind in metas:
            meta = self.config.meta.model_copy(update={"kind": kind})
            for population in populations:
                for generation_count in generations:
                    for rate in mutation_rates:
                        rows.append(self._ga_row(folds, meta, population, generation_count, rate))
        return rows

    def _ga_row(
        self, folds: GAFolds, meta: MetaConfig, population: int, generations: int, rate: float
    ) -> GridRow:
        ga = self.config.ga.model_copy(
            update={"population": population, "generations": generations, "mutation_rate": rate}
        )
        seed = self.selection.seed
        evaluator = SubsetEvaluator(folds, meta, seed=seed, sigma=ga.sigma)
        result = run_ga(ga, evaluator, seed)
        return GridRow(
            population=population,
            generations=generations,
            mutation_rate=rate,
            meta=meta.kind.value,
            best_fitness=result.record.fitness,
            evaluations=evaluator.evaluations,
            best_subset_ids=result.record.detector_ids,
        )

    def ga_grid(
        self,
        series: TimeSeries,
        *,
        populations: Sequence[int] = (10, 50),
        generations: Sequence[int] = (100, 1000),
        mutation_rate: float = 0.2,
        detectors: Sequence[AnomalyDetector] | None = None,
    ) -> list[GridRow]:
        rows = self._sweep(
            self.ga_instance(series, detectors),
            populations=populations,
            generations=generations,
            mutation_rates=[mutation_rate],
            metas=[self.config.meta.kind],
        )
        self.writer.write("experiment_ga_grid", rows)
        return rows

    def mutation(
        self,
        series: TimeSeries,
        *,
        rates: Sequence[float] = (0.0, 0.05, 0.2, 1.0),
        detectors: Sequence[AnomalyDetector] | None = None,
    ) -> list[GridRow]:
        rows = self._sweep(
            self.ga_instance(series, detectors),
            populations=[self.config.ga.population],
            generations=[self.config.ga.generations],
            mutation_rates=rates,
            metas=[self.config.meta.kind],
        )
        self.writer.write("experiment_mutation", rows)
        return rows

    def meta(
        self,
        series: TimeSeries,
        *,
        kinds: Sequence[MetaLearnerKind] = tuple(MetaLearnerKind),
        detectors: Sequence[AnomalyDetector] | None = None,
    ) -> list[GridRow]:
        rows = self._sweep(
            self.ga_instance(series, detectors),
            populations=[self.config.ga.population],
            generations=[self.config.ga.generations],
            mutation_rates=[self.config.ga.mutation_rate],
            metas=kinds,
        )
        self.writer.write("experiment_meta", rows)
        return rows

    def adaptation(
        self,
        series: TimeSeries,
        *,
        seeds: Sequence[int] = tuple(range(10)),
        shift_fraction: float = 0.5,
        detectors: Sequence[AnomalyDetector] | None = None,
    ) -> list[AdaptationRow]:
        """Final-branch event F1 after a regime shift in the online split, re-optimization on vs off."""
        if series.labels is None:
            raise InvalidParameterError("The adaptation experiment needs a labeled series")
        offline_rows = int(self.config.split.offline_fraction * series.length)
        shift_at = offline_rows + int(shift_fraction * (series.length - offline_rows))
        shifted = inject_regime_shift(series, shift_at)

        rows = []
        for seed in seeds:
            f1: dict[bool, float] = {}
            for reopt in (True, False):
                config = self.config.model_copy(
                    update={"seed": seed, "online": self.config.online.model_copy(update={"reopt": reopt})}
                )
                f1[reopt] = self._post_shift_f1(config, shifted, shift_at - offline_rows, detectors)
            rows.append(AdaptationRow(seed=seed, shift_at=shift_at, f1_reopt=f1[True], f1_static=f1[False]))
            logger.info("Adaptation seed %d: reopt=%.4f static=%.4f", seed, f1[True], f1[False])
        self.writer.write("experiment_adaptation", rows)
        return rows

    @staticmethod
    def _post_shift_f1(
        config: RunConfig,
        series: TimeSeries,
        online_shift: int,
        detectors: Sequence[AnomalyDetector] | None,
    ) -> float:
        streaming = StreamingService(SelectionService(config))
        run = streaming.run_online(series, detectors=detectors)
        assert run.offline.online is not None and run.offline.online.labels is not None
        flags = timestep_decisions(run.decisions, run.state.spec.stride)["final"]
        truth = run.offline.online.labels[: flags.size]
        return event_f1(flags[online_shift:], truth[online_shift:]).f1

    def run(self, name: str, series: TimeSeries, **options: Any) -> list[Any]:
        if name == "ga-grid":
            return list(self.ga_grid(series, **options))
        if name == "mutation":
            return list(self.mutation(series, **options))
        if name == "meta":
            return list(self.meta(series, **options))
        if name == "adaptation":
            return list(self.adaptation(series, **options))
        raise InvalidParameterError(f"Unknown experiment {name!r}; choose from {', '.join(EXPERIMENTS)}")
