from fastapi.testclient import TestClient

from app.core.config import settings
from app.models.api import SeriesPayload
from app.models.series import TimeSeries
from tests.utils.utils import fast_config_values, flatten_config


def test_run_selection(client: TestClient, point_series: TimeSeries) -> None:
    data = {
        "series": SeriesPayload.from_series(point_series).model_dump(),
        "overrides": flatten_config(fast_config_values()),
    }
    response = client.post(f"{settings.API_V1_STR}/selection/", json=data)
    assert response.status_code == 200
    content = response.json()
    assert content["seed"] == 11
    assert content["pool"] == ["knn_1", "md_1", "rm_1", "hbos_1"]
    assert content["designated"] in {"single", "ensemble"}
    assert sorted(content["final"]["ids"]) == sorted(content["pool"])


def test_run_selection_unknown_override(client: TestClient, point_series: TimeSeries) -> None:
    data = {
        "series": SeriesPayload.from_series(point_series).model_dump(),
        "overrides": {"ga.colonies": "3"},
    }
    response = client.post(f"{settings.API_V1_STR}/selection/", json=data)
    assert response.status_code == 400
    content = response.json()
    assert content["error_code"] == "CONFIG_ERROR"
    assert "ga.colonies" in content["detail"]
