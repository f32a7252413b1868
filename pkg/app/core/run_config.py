"""Flat ``key = value`` run-configuration files.

Example::

    # comments and blank lines are ignored
    seed = 7
    ga.population = 20
    pool.knn.count = 3
    lints.lambda = 1.0

Dotted keys are nested into sections and validated by ``RunConfig``, which
rejects unknown keys. Overrides (CLI flags) replace file values key by key.
"""

import logging
from collections.abc import Mapping
from pathlib import Path
from typing import Any

from pydantic import ValidationError

from app.core.exceptions import ConfigError, ResourceNotFoundError
from app.models.config import RunConfig

logger = logging.getLogger(__name__)

_NULL_VALUES = {"none", "null"}


def parse_config_text(text: str, *, source: str = "<config>") -> dict[str, str]:
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"{source}:{lineno}: empty key")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key}", key=key)
        values[key] = value
    return values


def read_config_file(path: Path) -> dict[str, str]:
    if not path.is_file():
        raise ResourceNotFoundError("Config file", path)
    return parse_config_text(path.read_text(encoding="utf-8"), source=str(path))


def nest_keys(flat: Mapping[str, str]) -> dict[str, Any]:
    tree: dict[str, Any] = {}
    for key, value in flat.items():
        parts = key.split(".")
        if any(not part for part in parts):
            raise ConfigError(f"Malformed key {key}", key=key)
        node = tree
        for part in parts[:-1]:
            child = node.setdefault(part, {})
            if not isinstance(child, dict):
                raise ConfigError(f"Key {key} conflicts with a value key", key=key)
            node = child
        if isinstance(node.get(parts[-1]), dict):
            raise ConfigError(f"Key {key} conflicts with a section", key=key)
        node[parts[-1]] = None if value.lower() in _NULL_VALUES else value
    return tree


def load_run_config(
    path: Path | None = None, overrides: Mapping[str, str] | None = None
) -> RunConfig:
    flat: dict[str, str] = {}
    if path is not None:
        flat.update(read_config_file(path))
        logger.info("Loaded %d config keys from %s", len(flat), path)
    flat.update(overrides or {})
    try:
        return RunConfig.model_validate(nest_keys(flat))
    except ValidationError as exc:
        error = exc.errors()[0]
        key = ".".join(str(part) for part in error["loc"])
        raise ConfigError(f"Invalid config key {key}: {error['msg']}", key=key)


def config_echo(config: RunConfig) -> dict[str, Any]:
    return config.model_dump(mode="json", by_alias=True, exclude={"out"})
