import numpy as np
import pytest

from app.algorithms.ga_ens import (
    GAFolds,
    SubsetEvaluator,
    crossover,
    enumerate_subsets,
    evaluate_subset,
    initial_population,
    mutate,
    run_ga,
)
from app.core.exceptions import InvalidParameterError
from app.models.config import GAConfig, MetaConfig, MetaLearnerKind
from app.models.ensemble import Subset
from app.models.scores import LabeledScores, ScoreMatrix

LR = MetaConfig(kind=MetaLearnerKind.LR)


def _fold(labels: np.ndarray, rng: np.random.Generator, width: int = 4) -> LabeledScores:
    noise = rng.random((labels.size, width))
    noise[:, 0] = np.clip(0.6 * labels + 0.3 * noise[:, 0], 0.0, 1.0)
    ids = tuple(f"d{i}" for i in range(width))
    return LabeledScores(ScoreMatrix(noise, ids), labels)


def _folds(width: int = 4, seed: int = 0) -> GAFolds:
    rng = np.random.default_rng(seed)
    train_labels = np.zeros(120, dtype=int)
    train_labels[[10, 11, 40, 70, 71, 100]] = 1
    validation_labels = np.zeros(60, dtype=int)
    validation_labels[[5, 30, 31, 50]] = 1
    return GAFolds(_fold(train_labels, rng, width), _fold(validation_labels, rng, width))


def test_subset_basics() -> None:
    subset = Subset.of([0, 2], 4)
    assert subset.mask == 0b101
    assert subset.members == (0, 2)
    assert 2 in subset and 1 not in subset
    assert len(subset) == 2
    assert subset.ids(["a", "b", "c", "d"]) == ["a", "c"]


def test_subset_rejects_empty_and_out_of_range() -> None:
    with pytest.raises(InvalidParameterError):
        Subset(0, 3)
    with pytest.raises(InvalidParameterError):
        Subset.of([3], 3)


def test_enumerate_subsets_covers_power_set() -> None:
    masks = [s.mask for s in enumerate_subsets(4)]
    assert masks == list(range(1, 16))


def test_folds_must_share_columns() -> None:
    folds = _folds()
    other = LabeledScores(ScoreMatrix(folds.validation.matrix.scores, ("a", "b", "c", "d")), folds.validation.labels)
    with pytest.raises(InvalidParameterError):
        GAFolds(folds.train, other)


def test_evaluate_subset_record() -> None:
    folds = _folds()
    record = evaluate_subset(Subset.of([0], 4), LR, folds.train, folds.validation, seed=1)
    assert record.f1 == 1.0
    assert record.fitness == 1.0
    assert record.detector_ids == ["d0"]


def test_sigma_blends_f1_and_auc_pr() -> None:
    folds = _folds()
    subset = Subset.of([1, 2], 4)
    f1_only = evaluate_subset(subset, LR, folds.train, folds.validation, seed=1, sigma=1.0)
    auc_only = evaluate_subset(subset, LR, folds.train, folds.validation, seed=1, sigma=0.0)
    assert f1_only.fitness == pytest.approx(f1_only.f1)
    assert auc_only.fitness == pytest.approx(auc_only.auc_pr)


def test_evaluator_memoizes() -> None:
    evaluator = SubsetEvaluator(_folds(), LR, seed=2)
    first = evaluator.evaluate(Subset.of([1], 4))
    second = evaluator.evaluate(Subset.of([1], 4))
    assert first is second
    assert evaluator.evaluations == 1


def test_ga_matches_exhaustive_search_on_small_pool() -> None:
    folds = _folds()
    evaluator = SubsetEvaluator(folds, LR, seed=5)
    exhaustive, exhaustive_record = SubsetEvaluator(folds, LR, seed=5).best_exhaustive()
    result = run_ga(GAConfig(population=16, generations=5, mutation_rate=0.2), evaluator, seed=5)
    assert result.record.fitness == exhaustive_record.fitness
    assert result.best == exhaustive


def test_ga_history_is_monotone_and_reported() -> None:
    seen: list[int] = []
    result = run_ga(
        GAConfig(population=6, generations=4),
        SubsetEvaluator(_folds(width=6), LR, seed=3),
        seed=3,
        on_generation=lambda summary: seen.append(summary.generation),
    )
    best = [g.best_fitness for g in result.history]
    assert seen == [0, 1, 2, 3]
    assert len(result.history) == 4
    assert best == sorted(best)
    assert result.history[-1].best_subset_ids == result.record.detector_ids


def test_ga_is_deterministic() -> None:
    config = GAConfig(population=6, generations=3, mutation_rate=0.5)
    first = run_ga(config, SubsetEvaluator(_folds(width=6), LR, seed=9), seed=9)
    second = run_ga(config, SubsetEvaluator(_folds(width=6), LR, seed=9), seed=9)
    assert first.best == second.best
    assert first.history == second.history


def test_ga_needs_two_detectors() -> None:
    with pytest.raises(InvalidParameterError):
        run_ga(GAConfig(), SubsetEvaluator(_folds(width=1), LR, seed=0), seed=0)


def test_initial_population_small_space_lists_every_subset() -> None:
    population = initial_population(3, 10, np.random.default_rng(0))
    assert len(population) == 10
    assert {s.mask for s in population} == set(range(1, 8))


def test_initial_population_large_space_is_distinct() -> None:
    population = initial_population(12, 20, np.random.default_rng(0))
    assert len({s.mask for s in population}) == 20


def test_crossover_and_mutation_never_empty() -> None:
    rng = np.random.default_rng(1)
    a, b = Subset.of([0], 5), Subset.of([4], 5)
    for _ in range(200):
        child = crossover(a, b, rng)
        assert set(child.members) <= {0, 4}
        assert len(mutate(child, 1.0, rng)) >= 1


def test_zero_mutation_rate_is_identity() -> None:
    rng = np.random.default_rng(1)
    subset = Subset.of([1, 3], 5)
    assert all(mutate(subset, 0.0, rng) == subset for _ in range(50))


def test_crossover_of_disjoint_singletons_reaches_every_outcome() -> None:
    rng = np.random.default_rng(4)
    a, b = Subset.of([0], 3), Subset.of([1], 3)
    outcomes = {crossover(a, b, rng).mask for _ in range(1000)}
    assert outcomes == {0b001, 0b010, 0b011}


def test_mutation_of_a_singleton_adds_and_swaps() -> None:
    rng = np.random.default_rng(4)
    subset = Subset.of([0], 4)
    outcomes = [mutate(subset, 1.0, rng) for _ in range(1000)]
    added = [s for s in outcomes if len(s) == 2]
    swapped = [s for s in outcomes if len(s) == 1 and 0 not in s]
    assert added and all(0 in s for s in added)
    assert {s.members[0] for s in swapped} == {1, 2, 3}


def test_ga_reaches_exhaustive_optimum_on_six_detectors() -> None:
    hits = 0
    for seed in range(10):
        evaluator = SubsetEvaluator(_folds(width=6, seed=seed), LR, seed=seed)
        result = run_ga(GAConfig(population=20, generations=20), evaluator, seed=seed)
        _, optimum = evaluator.best_exhaustive()
        hits += result.record.fitness >= optimum.fitness - 0.02
    assert hits >= 9


def test_best_fitness_is_flat_across_population_and_generations() -> None:
    folds = _folds(width=6)
    best = [
        run_ga(
            GAConfig(population=population, generations=generations, mutation_rate=0.2),
            SubsetEvaluator(folds, LR, seed=6),
            seed=6,
        ).record.fitness
        for population in (10, 50)
        for generations in (100, 1000)
    ]
    assert max(best) - min(best) < 0.02


def test_best_fitness_is_flat_across_mutation_rates() -> None:
    folds = _folds(width=6)
    best = [
        run_ga(
            GAConfig(population=10, generations=100, mutation_rate=rate),
            SubsetEvaluator(folds, LR, seed=6),
            seed=6,
        ).record.fitness
        for rate in (0.0, 0.05, 0.2, 1.0)
    ]
    assert max(best) - min(best) < 0.02
