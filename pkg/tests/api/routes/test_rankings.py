from fastapi.testclient import TestClient

from app.core.config import settings


def test_aggregate_unanimous_rankings(client: TestClient) -> None:
    order = ["knn_1", "md_1", "rm_1"]
    response = client.post(
        f"{settings.API_V1_STR}/rankings/aggregate",
        json={"rankings": [order, order]},
    )
    assert response.status_code == 200
    content = response.json()
    assert content["ranking"]["ids"] == order
    assert content["converged"] is True
    assert abs(sum(content["stationary"]) - 1.0) < 1e-9


def test_aggregate_literal_orientation(client: TestClient) -> None:
    response = client.post(
        f"{settings.API_V1_STR}/rankings/aggregate",
        json={"rankings": [["a", "b"]], "orientation": "literal"},
    )
    assert response.status_code == 200
    assert response.json()["ranking"]["ids"] == ["b", "a"]


def test_aggregate_rejects_duplicate_ids(client: TestClient) -> None:
    response = client.post(
        f"{settings.API_V1_STR}/rankings/aggregate",
        json={"rankings": [["a", "a", "b"]]},
    )
    assert response.status_code == 422
    assert response.json()["error_code"] == "INVALID_RANKING"


def test_aggregate_needs_a_ranking(client: TestClient) -> None:
    response = client.post(f"{settings.API_V1_STR}/rankings/aggregate", json={"rankings": []})
    assert response.status_code == 422
