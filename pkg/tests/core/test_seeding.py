import numpy as np
import pytest

from app.core.config import Settings, settings
from app.core.seeding import DEFAULT_SEED, derive_rng, derive_seed, resolve_seed


def test_derived_streams_are_reproducible() -> None:
    first = derive_rng(5, "ga", 3).random(4)
    second = derive_rng(5, "ga", 3).random(4)
    np.testing.assert_array_equal(first, second)


def test_stage_keys_separate_streams() -> None:
    assert derive_seed(5, "ga") != derive_seed(5, "lints")
    assert derive_seed(5, "tree", 0) != derive_seed(5, "tree", 1)


def test_resolve_seed_prefers_explicit_values(monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.setattr(settings, "RAMSES_SEED", 99)
    assert resolve_seed(None, 4) == 4
    assert resolve_seed(None) == 99
    monkeypatch.setattr(settings, "RAMSES_SEED", None)
    assert resolve_seed() == DEFAULT_SEED


def test_seed_is_read_from_the_environment(monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.delenv("TSAD_SEED", raising=False)
    monkeypatch.setenv("RAMSES_SEED", "17")
    monkeypatch.setattr("app.core.seeding.settings", Settings())
    assert resolve_seed(None, None) == 17


def test_older_seed_variable_is_accepted(monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.delenv("RAMSES_SEED", raising=False)
    monkeypatch.setenv("TSAD_SEED", "23")
    assert Settings().RAMSES_SEED == 23
