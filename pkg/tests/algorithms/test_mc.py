import numpy as np

from app.algorithms.detectors import fit_pool
from app.algorithms.perturb import run_mc
from app.algorithms.perturb.mc import mc_trial, rank_by_f1
from app.models.config import McConfig
from app.models.series import TimeSeries
from tests.utils.detectors import ConstantDetector, LabelOracleDetector, custom

CONFIG = McConfig(trials=3, anomalies=5, context=20)


def test_mc_trial_marks_injected_positions(point_series: TimeSeries) -> None:
    trial = mc_trial(point_series.without_labels(), CONFIG, np.random.default_rng(0))
    assert trial.positions.size == 5
    assert np.all(np.diff(trial.positions) > 0)
    assert trial.series.labels is not None
    assert trial.series.labels.sum() == 5
    assert np.all(trial.series.labels[trial.positions] == 1)
    assert np.all((trial.magnitudes >= 0.5) & (trial.magnitudes <= 3.0))


def test_mc_trial_keeps_ground_truth_labels(point_series: TimeSeries) -> None:
    trial = mc_trial(point_series, CONFIG, np.random.default_rng(0))
    assert trial.series.labels is not None
    assert np.all(trial.series.labels[point_series.labels == 1] == 1)


def test_mc_trial_anomaly_offsets_scale_with_context() -> None:
    flat = TimeSeries("flat", np.zeros(100))
    trial = mc_trial(flat, McConfig(noise=0.0, anomalies=3, context=10), np.random.default_rng(1))
    offsets = np.abs(trial.series.values[trial.positions, 0])
    assert np.allclose(offsets, trial.magnitudes)


def test_mc_trial_does_not_touch_input(point_series: TimeSeries) -> None:
    before = point_series.values.copy()
    mc_trial(point_series, CONFIG, np.random.default_rng(3))
    assert np.array_equal(point_series.values, before)


def test_rank_by_f1_breaks_ties_by_auc_then_order() -> None:
    ranking = rank_by_f1(["a", "b", "c"], np.array([0.5, 0.9, 0.5]), np.array([0.2, 0.1, 0.4]))
    assert ranking.ids == ["b", "c", "a"]
    assert rank_by_f1(["a", "b"], np.array([0.5, 0.5])).ids == ["a", "b"]


def test_run_mc_ranks_oracle_above_constant(point_series: TimeSeries) -> None:
    series = point_series.without_labels()
    pool = fit_pool(
        [custom(ConstantDetector, "constant"), custom(LabelOracleDetector, "oracle")], series
    )
    result = run_mc(pool, series, CONFIG, seed=4)
    assert result.ranking.ids == ["oracle", "constant"]
    assert result.trial_f1.shape == (3, 2)
    assert np.all(result.trial_auc[:, 1] == 1.0)
    assert len(result.trials) == 3


def test_run_mc_is_deterministic(point_series: TimeSeries) -> None:
    pool = fit_pool([custom(ConstantDetector, "c"), custom(LabelOracleDetector, "o")], point_series)
    first = run_mc(pool, point_series, CONFIG, seed=9)
    second = run_mc(pool, point_series, CONFIG, seed=9)
    assert np.array_equal(first.trial_f1, second.trial_f1)
    assert all(
        np.array_equal(a.positions, b.positions) for a, b in zip(first.trials, second.trials, strict=True)
    )


def test_mc_background_noise_is_absolute() -> None:
    ramp = TimeSeries("ramp", np.linspace(0.0, 1000.0, 2000))
    trial = mc_trial(ramp, McConfig(noise=0.1, anomalies=1, context=10), np.random.default_rng(2))
    clean = np.ones(ramp.length, dtype=bool)
    clean[trial.positions] = False
    residual = (trial.series.values - ramp.values)[clean, 0]
    assert 0.09 < residual.std() < 0.11
