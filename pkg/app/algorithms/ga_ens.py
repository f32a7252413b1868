"""Genetic search over detector subsets with a stacking meta-learner as fitness."""

import logging
from collections.abc import Callable, Iterator
from dataclasses import dataclass, field

import numpy as np

from app.algorithms.meta import TrainedMeta, train_meta
from app.algorithms.metrics import auc_pr_or_zero, best_f1_threshold
from app.core.exceptions import InvalidParameterError
from app.core.seeding import derive_rng, derive_seed
from app.models.config import GAConfig, MetaConfig
from app.models.ensemble import FitnessRecord, GenerationSummary, Subset
from app.models.scores import LabeledScores

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GAFolds:
    train: LabeledScores
    validation: LabeledScores

    def __post_init__(self) -> None:
        if self.train.matrix.detector_ids != self.validation.matrix.detector_ids:
            raise InvalidParameterError("Train and validation folds must share detector columns")

    @property
    def detector_ids(self) -> tuple[str, ...]:
        return self.train.matrix.detector_ids

    @property
    def pool_size(self) -> int:
        return self.train.matrix.width


def subset_seed(seed: int, subset: Subset) -> int:
    return derive_seed(seed, "meta", subset.mask)


def train_subset_meta(
    subset: Subset, meta: MetaConfig, train: LabeledScores, seed: int
) -> TrainedMeta:
    features = train.matrix.columns(subset.members)
    return train_meta(meta, features, train.labels, subset_seed(seed, subset))


def evaluate_subset(
    subset: Subset,
    meta: MetaConfig,
    train: LabeledScores,
    validation: LabeledScores,
    seed: int,
    *,
    sigma: float = 1.0,
) -> FitnessRecord:
    model = train_subset_meta(subset, meta, train, seed)
    predictions = model.predict(validation.matrix.columns(subset.members))
    threshold, f1 = best_f1_threshold(predictions, validation.labels)
    area = auc_pr_or_zero(predictions, validation.labels)
    return FitnessRecord(
        members=list(subset.members),
        detector_ids=subset.ids(validation.matrix.detector_ids),
        f1=f1,
        auc_pr=area,
        fitness=min(1.0, max(0.0, sigma * f1 + (1 - sigma) * area)),
        threshold=threshold,
    )


class SubsetEvaluator:
    """Memoized fitness: a pure function of (subset, seed)."""

    def __init__(
        self, folds: GAFolds, meta: MetaConfig, *, seed: int, sigma: float = 1.0
    ) -> None:
        self.folds = folds
        self.meta = meta
        self.seed = seed
        self.sigma = sigma
        self._cache: dict[int, FitnessRecord] = {}

    @property
    def evaluations(self) -> int:
        return len(self._cache)

    def evaluate(self, subset: Subset) -> FitnessRecord:
        record = self._cache.get(subset.mask)
        if record is None:
            record = evaluate_subset(
                subset,
                self.meta,
                self.folds.train,
                self.folds.validation,
                self.seed,
                sigma=self.sigma,
            )
            self._cache[subset.mask] = record
        return record

    def train(self, subset: Subset) -> TrainedMeta:
        return train_subset_meta(subset, self.meta, self.folds.train, self.seed)

    def best_exhaustive(self) -> tuple[Subset, FitnessRecord]:
        best: tuple[Subset, FitnessRecord] | None = None
        for subset in enumerate_subsets(self.folds.pool_size):
            record = self.evaluate(subset)
            if best is None or record.fitness > best[1].fitness:
                best = (subset, record)
        assert best is not None
        return best


def enumerate_subsets(pool_size: int) -> Iterator[Subset]:
    for mask in range(1, 1 << pool_size):
        yield Subset(mask, pool_size)


def _repair(subset_mask: int, donors: tuple[int, ...], pool_size: int, rng: np.random.Generator) -> Subset:
    if subset_mask:
        return Subset(subset_mask, pool_size)
    return Subset(1 << donors[int(rng.integers(len(donors)))], pool_size)


def crossover(first: Subset, second: Subset, rng: np.random.Generator) -> Subset:
    """Uniform crossover; an empty child receives one member of the parents' union."""
    size = first.pool_size
    take_first = rng.random(size) < 0.5
    pick_mask = sum(1 << i for i in range(size) if take_first[i])
    full = (1 << size) - 1
    child = (first.mask & pick_mask) | (second.mask & ~pick_mask & full)
    union = Subset(first.mask | second.mask, size)
    return _repair(child, union.members, size, rng)


def mutate(subset: Subset, rate: float, rng: np.random.Generator) -> Subset:
    """One add/remove/swap with probability ``rate``; impossible actions are no-ops."""
    if rng.random() >= rate:
        return subset
    members = subset.members
    outside = tuple(i for i in range(subset.pool_size) if i not in subset)
    action = int(rng.integers(3))
    mask = subset.mask
    if action == 0:
        if not outside:
            return subset
        mask |= 1 << outside[int(rng.integers(len(outside)))]
    elif action == 1:
        mask &= ~(1 << members[int(rng.integers(len(members)))])
    else:
        if not outside:
            return subset
        mask &= ~(1 << members[int(rng.integers(len(members)))])
        mask |= 1 << outside[int(rng.integers(len(outside)))]
    return _repair(mask, members, subset.pool_size, rng)


def initial_population(pool_size: int, population: int, rng: np.random.Generator) -> list[Subset]:
    """Distinct random non-empty subsets; all of them (padded with repeats) when the space is small."""
    total = (1 << pool_size) - 1
    if total <= 4 * population:
        if population >= total:
            masks = list(range(1, total + 1))
            masks += [int(m) for m in rng.integers(1, total + 1, size=population - total)]
        else:
            masks = [int(m) for m in rng.choice(np.arange(1, total + 1), size=population, replace=False)]
        return [Subset(m, pool_size) for m in masks]

    seen: set[int] = set()
    ordered: list[int] = []
    while len(ordered) < population:
        mask = sum(1 << int(i) for i in np.flatnonzero(rng.random(pool_size) < 0.5))
        if mask and mask not in seen:
            seen.add(mask)
            ordered.append(mask)
    return [Subset(m, pool_size) for m in ordered]


@dataclass
class GAResult:
    best: Subset
    record: FitnessRecord
    history: list[GenerationSummary] = field(default_factory=list)


def run_ga(
    config: GAConfig,
    evaluator: SubsetEvaluator,
    seed: int,
    *,
    on_generation: Callable[[GenerationSummary], None] | None = None,
) -> GAResult:
    pool_size = evaluator.folds.pool_size
    if pool_size < 2:
        raise InvalidParameterError(f"GA needs a pool of at least 2 detectors, got {pool_size}")
    rng = derive_rng(seed, "ga")
    ids = evaluator.folds.detector_ids
    elite_count = config.elite_count

    population = initial_population(pool_size, config.population, rng)
    best: tuple[Subset, FitnessRecord] | None = None
    history: list[GenerationSummary] = []

    for generation in range(config.generations):
        records = [evaluator.evaluate(s) for s in population]
        for subset, record in zip(population, records, strict=True):
            if best is None or record.fitness > best[1].fitness:
                best = (subset, record.model_copy(update={"generation": generation}))
        assert best is not None
        summary = GenerationSummary(
            generation=generation,
            best_fitness=best[1].fitness,
            mean_fitness=float(np.mean([r.fitness for r in records])),
            best_subset_ids=best[0].ids(ids),
            evaluations=evaluator.evaluations,
        )
        history.append(summary)
        if on_generation is not None:
            on_generation(summary)
        logger.debug(
            "GA generation %d: best=%.4f mean=%.4f", generation, summary.best_fitness, summary.mean_fitness
        )
        if generation == config.generations - 1:
            break

        ranked = sorted(range(len(population)), key=lambda i: (-records[i].fitness, population[i].mask))
        elites = [population[i] for i in ranked[:elite_count]]
        children: list[Subset] = []
        while len(children) < config.population - elite_count:
            picks = rng.choice(elite_count, size=config.parents, replace=config.parents > elite_count)
            child = elites[int(picks[0])]
            for pick in picks[1:]:
                child = crossover(child, elites[int(pick)], rng)
            children.append(mutate(child, config.mutation_rate, rng))
        population = elites + children

    assert best is not None
    logger.info(
        "GA finished: best fitness %.4f with %s after %d evaluations",
        best[1].fitness,
        best[1].detector_ids,
        evaluator.evaluations,
    )
    return GAResult(best[0], best[1], history)
