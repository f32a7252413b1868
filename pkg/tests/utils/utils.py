from typing import Any

import numpy as np

from app.models.ranking import Ranking


def fast_config_values(**sections: dict[str, Any]) -> dict[str, Any]:
    """A RunConfig payload small enough for unit tests; sections override key by key."""
    values: dict[str, Any] = {
        "seed": 11,
        "pool": {
            "knn": {"count": 1, "k": 5},
            "lof": {"count": 0},
            "md": {"count": 1},
            "rm": {"count": 1, "window": 10},
            "hbos": {"count": 1, "bins": 10},
            "pca": {"count": 0},
            "iforest": {"count": 0},
            "kmeans": {"count": 0},
        },
        "meta": {"kind": "lr"},
        "ga": {"population": 6, "generations": 3},
        "labels": {"context": 20},
        "lints": {"windows": 10},
        "gan": {"epochs": 2, "batch_size": 16, "noise_dim": 4, "hidden": 8, "pool_factor": 3},
        "sba": {"context": 20},
        "mc": {"trials": 2, "anomalies": 5, "context": 20},
        "online": {"period": 5},
    }
    for name, section in sections.items():
        merged = dict(values.get(name, {}))
        merged.update(section)
        values[name] = merged
    return values


def random_rankings(
    rng: np.random.Generator, size: int, count: int
) -> list[Ranking]:
    ids = [f"d{i}" for i in range(size)]
    return [Ranking(ids=[ids[i] for i in rng.permutation(size)]) for _ in range(count)]


def flatten_config(values: dict[str, Any], prefix: str = "") -> dict[str, str]:
    """Dotted ``key -> str`` pairs, the shape config files and overrides use."""
    flat: dict[str, str] = {}
    for key, value in values.items():
        if isinstance(value, dict):
            flat.update(flatten_config(value, f"{prefix}{key}."))
        else:
            flat[f"{prefix}{key}"] = str(value)
    return flat
