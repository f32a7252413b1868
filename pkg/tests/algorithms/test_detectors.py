import numpy as np
import pytest

from app.algorithms.detectors import (
    DETECTOR_CLASSES,
    build_pool,
    calibrate,
    create_detector,
    fit,
    fit_pool,
    normalize,
    reduce_windows,
    score_matrix,
)
from app.core.exceptions import (
    DimensionMismatchError,
    InsufficientDataError,
    InvalidParameterError,
)
from app.models.config import FamilyRequest
from app.models.detector import DetectorConfig, DetectorFamily
from app.models.series import TimeSeries, WindowSpec


def _gaussian(length: int = 300, dims: int = 2, seed: int = 0) -> TimeSeries:
    rng = np.random.default_rng(seed)
    return TimeSeries("gaussian", rng.normal(size=(length, dims)))


def test_calibrate_promotes_zero_range() -> None:
    assert calibrate(np.array([2.0, 2.0, 2.0])) == (2.0, 3.0)
    assert calibrate(np.array([1.0, 3.0])) == (1.0, 3.0)


def test_normalize_clips_into_unit_interval() -> None:
    out = normalize(np.array([-1.0, 0.0, 5.0, 10.0, 20.0]), (0.0, 10.0))
    assert np.allclose(out, [0.0, 0.0, 0.5, 1.0, 1.0])


def test_normalize_rejects_non_finite_calibration() -> None:
    with pytest.raises(InvalidParameterError):
        normalize(np.zeros(3), (0.0, float("inf")))


def test_build_pool_counts_and_ids() -> None:
    configs = build_pool({DetectorFamily.KNN: 3, DetectorFamily.HBOS: 2}, seed=7)
    assert [c.id for c in configs] == ["knn_1", "knn_2", "knn_3", "hbos_1", "hbos_2"]
    for config in configs:
        if config.family is DetectorFamily.KNN:
            assert 3 <= config.params["k"] <= 50
        else:
            assert 5 <= config.params["bins"] <= 50


def test_build_pool_is_deterministic_and_order_free() -> None:
    first = build_pool({DetectorFamily.KNN: 2, DetectorFamily.RM: 2}, seed=3)
    second = build_pool({DetectorFamily.RM: 2, DetectorFamily.KNN: 2}, seed=3)
    assert first == second


def test_build_pool_fixed_parameter_wins() -> None:
    configs = build_pool({DetectorFamily.KNN: FamilyRequest(count=2, k=4), DetectorFamily.MD: 1}, seed=1)
    assert [c.params["k"] for c in configs if c.family is DetectorFamily.KNN] == [4, 4]


def test_build_pool_pca_components_bounded_by_features() -> None:
    configs = build_pool({DetectorFamily.PCA: 5}, seed=2, n_features=3)
    assert all(1 <= c.params["components"] <= 3 for c in configs)


def test_build_pool_needs_two_members() -> None:
    with pytest.raises(InvalidParameterError):
        build_pool({DetectorFamily.KNN: 1}, seed=0)


def test_build_pool_rejects_custom_requests() -> None:
    with pytest.raises(InvalidParameterError):
        build_pool({DetectorFamily.CUSTOM: 2}, seed=0)


def test_create_detector_rejects_custom_family() -> None:
    with pytest.raises(InvalidParameterError):
        create_detector(DetectorConfig(id="mine", family=DetectorFamily.CUSTOM))


@pytest.mark.parametrize("family", list(DETECTOR_CLASSES))
def test_every_family_scores_in_unit_interval(family: DetectorFamily) -> None:
    params = {
        DetectorFamily.KNN: {"k": 5},
        DetectorFamily.LOF: {"k": 10},
        DetectorFamily.RM: {"window": 10},
        DetectorFamily.HBOS: {"bins": 10},
        DetectorFamily.PCA: {"components": 1},
        DetectorFamily.IFOREST: {"trees": 20, "subsample": 64},
        DetectorFamily.KMEANS: {"clusters": 3},
    }.get(family, {})
    train = _gaussian(seed=1)
    detector = fit(DetectorConfig(id="d", family=family, params=params, seed=4), train)
    test = _gaussian(length=50, seed=2)
    raw = detector.score(test)
    scores = detector.normalized_scores(test)
    assert raw.shape == (50,)
    assert np.all((scores >= 0) & (scores <= 1))


def test_outlier_scores_higher_than_inlier() -> None:
    detector = fit(DetectorConfig(id="knn", family=DetectorFamily.KNN, params={"k": 5}), _gaussian())
    query = TimeSeries("query", [[0.0, 0.0], [25.0, -25.0]])
    raw = detector.score(query)
    assert raw[1] > raw[0]
    assert detector.normalized_scores(query)[1] == 1.0


def test_rolling_mean_first_row_scores_zero() -> None:
    detector = fit(DetectorConfig(id="rm", family=DetectorFamily.RM, params={"window": 3}), _gaussian(dims=1))
    raw = detector.score(TimeSeries("ramp", [1.0, 2.0, 3.0, 10.0]))
    assert raw[0] == 0.0
    assert raw[1] == pytest.approx(1.0)
    assert raw[3] == pytest.approx(8.0)


def test_scoring_unfitted_detector_raises() -> None:
    detector = create_detector(DetectorConfig(id="md", family=DetectorFamily.MD))
    with pytest.raises(InvalidParameterError):
        detector.score(_gaussian())


def test_scoring_wrong_width_raises() -> None:
    detector = fit(DetectorConfig(id="md", family=DetectorFamily.MD), _gaussian(dims=2))
    with pytest.raises(DimensionMismatchError):
        detector.score(_gaussian(dims=3))


def test_knn_needs_more_rows_than_neighbours() -> None:
    with pytest.raises(InsufficientDataError):
        fit(DetectorConfig(id="knn", family=DetectorFamily.KNN, params={"k": 10}), _gaussian(length=10))


def test_pca_components_above_dims_raise() -> None:
    with pytest.raises(InvalidParameterError):
        fit(DetectorConfig(id="pca", family=DetectorFamily.PCA, params={"components": 3}), _gaussian(dims=2))


def test_fit_does_not_modify_training_series() -> None:
    train = _gaussian()
    before = train.values.copy()
    fit(DetectorConfig(id="knn", family=DetectorFamily.KNN, params={"k": 5}), train)
    assert np.array_equal(train.values, before)


def test_score_matrix_column_order_and_windows() -> None:
    train = _gaussian(dims=1)
    pool = fit_pool(
        [
            create_detector(DetectorConfig(id="md", family=DetectorFamily.MD)),
            create_detector(DetectorConfig(id="rm", family=DetectorFamily.RM, params={"window": 5})),
        ],
        train,
    )
    matrix = score_matrix(pool, train)
    assert matrix.detector_ids == ("md", "rm")
    assert matrix.rows == 300
    windowed = score_matrix(pool, train, WindowSpec(width=10, stride=10))
    assert windowed.rows == 30
    assert np.allclose(windowed.scores[0], matrix.scores[:10].max(axis=0))


def test_reduce_windows_mean_and_identity() -> None:
    scores = np.arange(6, dtype=np.float64).reshape(-1, 1)
    assert reduce_windows(scores, WindowSpec(width=1)) is scores
    means = reduce_windows(scores, WindowSpec(width=2, stride=2), "mean")
    assert np.allclose(means[:, 0], [0.5, 2.5, 4.5])


def test_knn_argmax_survives_positive_scaling() -> None:
    train, query = _gaussian(seed=1), _gaussian(length=80, seed=2)
    config = DetectorConfig(id="knn", family=DetectorFamily.KNN, params={"k": 5})
    base = int(np.argmax(fit(config, train).score(query)))
    for factor in (0.01, 3.0, 250.0):
        scaled = fit(config, TimeSeries("scaled", train.values * factor))
        assert int(np.argmax(scaled.score(TimeSeries("scaled", query.values * factor)))) == base


def test_lof_is_near_one_on_uniform_density() -> None:
    rng = np.random.default_rng(3)
    train = TimeSeries("uniform", rng.uniform(size=(400, 2)))
    query = TimeSeries("uniform", rng.uniform(0.05, 0.95, size=(200, 2)))
    detector = fit(DetectorConfig(id="lof", family=DetectorFamily.LOF, params={"k": 20}), train)
    assert 0.8 <= float(detector.score(query).mean()) <= 1.2
