"""Per-stage random streams derived from one global seed.

Every stochastic stage asks for its own generator keyed by a stage name plus
optional integers (generation, trial, tree index, ...). String keys are hashed
with blake2b so the derivation does not depend on Python's hash salt, and the
resulting stream does not depend on the order in which stages run.
"""

import hashlib

import numpy as np

from app.core.config import settings

DEFAULT_SEED = 0

SeedKey = str | int


def _key_to_int(key: SeedKey) -> int:
    if isinstance(key, int):
        if key < 0:
            raise ValueError(f"Seed keys must be non-negative, got {key}")
        return key
    digest = hashlib.blake2b(key.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def seed_sequence(seed: int, *keys: SeedKey) -> np.random.SeedSequence:
    return np.random.SeedSequence([seed, *(_key_to_int(k) for k in keys)])


def derive_seed(seed: int, *keys: SeedKey) -> int:
    return int(seed_sequence(seed, *keys).generate_state(1, dtype=np.uint32)[0])


def derive_rng(seed: int, *keys: SeedKey) -> np.random.Generator:
    return np.random.default_rng(seed_sequence(seed, *keys))


def resolve_seed(*candidates: int | None) -> int:
    """First non-None candidate, then ``RAMSES_SEED``, then ``DEFAULT_SEED``."""
    for candidate in candidates:
        if candidate is not None:
            return candidate
    if settings.RAMSES_SEED is not None:
        return settings.RAMSES_SEED
    return DEFAULT_SEED
