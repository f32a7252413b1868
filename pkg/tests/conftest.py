from collections.abc import Generator

import pytest
from fastapi.testclient import TestClient

from app.algorithms.data import synth_generate
from app.main import app
from app.models.config import RunConfig
from app.models.series import TimeSeries
from tests.utils.utils import fast_config_values


@pytest.fixture(scope="module")
def client() -> Generator[TestClient, None, None]:
    with TestClient(app) as c:
        yield c


@pytest.fixture
def fast_config() -> RunConfig:
    return RunConfig.model_validate(fast_config_values())


@pytest.fixture(scope="session")
def point_series() -> TimeSeries:
    return synth_generate("point", 400, 1, 6, seed=3)


@pytest.fixture(scope="session")
def collective_series() -> TimeSeries:
    return synth_generate("collective", 600, 2, 4, seed=5)
