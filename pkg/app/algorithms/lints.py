"""Contextual linear Thompson sampling with epsilon-greedy exploration."""

import logging
import math
from collections import deque
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.linalg import cho_factor, cho_solve, cholesky, solve_triangular

from app.algorithms.data import segment
from app.algorithms.detectors.base import AnomalyDetector
from app.algorithms.metrics import auc_pr_or_zero, best_f1_threshold
from app.algorithms.perturb.injection import sba_augment
from app.core.exceptions import InsufficientDataError, InvalidParameterError
from app.core.seeding import derive_rng
from app.models.config import LabelsConfig, LinTSConfig
from app.models.ranking import Ranking
from app.models.series import TimeSeries, WindowSpec

logger = logging.getLogger(__name__)

CONTEXT_DIM = 8
_BIAS = CONTEXT_DIM - 1


@dataclass(frozen=True)
class Context:
    raw: np.ndarray
    x: np.ndarray


def context_features(window: np.ndarray) -> np.ndarray:
    """Eight features of the channel-averaged window; the last entry is the bias 1."""
    window = np.asarray(window, dtype=np.float64)
    series = window.mean(axis=1) if window.ndim == 2 else window
    if series.size < 2:
        raise InvalidParameterError(f"Context windows need width >= 2, got {series.size}")
    mean = series.mean()
    std = series.std()
    centered = series - mean
    denominator = float(centered @ centered)
    autocorr = float(centered[:-1] @ centered[1:]) / denominator if denominator > 0 else 0.0
    spread = series.max() - series.min()
    return np.array(
        [
            mean,
            std,
            series.min(),
            series.max(),
            np.abs(np.diff(series)).mean(),
            autocorr,
            spread / std if std > 0 else 0.0,
            1.0,
        ]
    )


class ContextStandardizer:
    """Running mean/variance (Welford) over the non-bias features of seen windows."""

    def __init__(self) -> None:
        self.count = 0
        self.mean = np.zeros(_BIAS)
        self._m2 = np.zeros(_BIAS)

    def transform(self, raw: np.ndarray) -> np.ndarray:
        std = np.sqrt(self._m2 / self.count) if self.count >= 2 else np.ones(_BIAS)
        std = np.where(std > 0, std, 1.0)
        x = raw.copy()
        x[:_BIAS] = (raw[:_BIAS] - self.mean) / std
        return x

    def update(self, raw: np.ndarray) -> None:
        self.count += 1
        delta = raw[:_BIAS] - self.mean
        self.mean = self.mean + delta / self.count
        self._m2 = self._m2 + delta * (raw[:_BIAS] - self.mean)


def extract_context(window: np.ndarray, standardizer: ContextStandardizer) -> Context:
    raw = context_features(window)
    context = Context(raw=raw, x=standardizer.transform(raw))
    standardizer.update(raw)
    return context


@dataclass(frozen=True)
class Posterior:
    mean: np.ndarray
    precision: np.ndarray
    count: int = 0

    @classmethod
    def prior(cls, dim: int = CONTEXT_DIM, ridge: float = 1.0) -> "Posterior":
        return cls(np.zeros(dim), ridge * np.eye(dim), 0)

    @property
    def covariance(self) -> np.ndarray:
        return cho_solve(cho_factor(self.precision), np.eye(self.mean.size))


def update_posterior(posterior: Posterior, x: np.ndarray, reward: float) -> Posterior:
    precision = posterior.precision + np.outer(x, x)
    rhs = posterior.precision @ posterior.mean + x * reward
    mean = cho_solve(cho_factor(precision), rhs)
    return Posterior(mean, precision, posterior.count + 1)


def select_arm(
    posteriors: Sequence[Posterior], x: np.ndarray, epsilon: float, rng: np.random.Generator
) -> int:
    """Uniform arm with probability epsilon, otherwise argmax of sampled theta . x."""
    if not posteriors:
        raise InvalidParameterError("select_arm needs at least one posterior")
    if len(posteriors) == 1:
        return 0
    if rng.random() < epsilon:
        return int(rng.integers(len(posteriors)))
    values = np.empty(len(posteriors))
    for m, posterior in enumerate(posteriors):
        z = rng.standard_normal(posterior.mean.size)
        # precision = L L^T, so L^-T z has covariance precision^-1.
        lower = cholesky(posterior.precision, lower=True)
        theta = posterior.mean + solve_triangular(lower.T, z, lower=False)
        values[m] = theta @ x
    return int(np.argmax(values))


def anneal(
    epsilon0: float,
    t: int,
    *,
    mode: str = "multiplicative",
    rate: float = 0.99,
    kappa: float = math.log(1 / 0.99),
) -> float:
    if t < 0:
        raise InvalidParameterError(f"Annealing step must be >= 0, got {t}")
    if mode == "multiplicative":
        return float(epsilon0 * rate**t)
    return float(epsilon0 * math.exp(-kappa * t))


class RewardBreakdown(NamedTuple):
    reward: float
    f1: float
    auc_pr: float


def compute_reward(
    window_scores: np.ndarray,
    window_labels: np.ndarray,
    buffer: Sequence[tuple[np.ndarray, np.ndarray]],
    alpha: float,
) -> RewardBreakdown:
    """alpha * F1 on the current window + (1 - alpha) * AUC-PR over ``buffer``.

    ``buffer`` holds (scores, labels) pairs; a buffer without positives
    contributes an AUC-PR of 0.
    """
    _, f1 = best_f1_threshold(window_scores, window_labels)
    if buffer:
        scores = np.concatenate([s for s, _ in buffer])
        labels = np.concatenate([y for _, y in buffer])
        area = auc_pr_or_zero(scores, labels)
    else:
        area = 0.0
    return RewardBreakdown(alpha * f1 + (1 - alpha) * area, f1, area)


@dataclass
class LinTSBandit:
    """Arms with Bayesian linear reward models; one owner advances the state."""

    n_arms: int
    config: LinTSConfig
    rng: np.random.Generator
    dim: int = CONTEXT_DIM
    posteriors: list[Posterior] = field(init=False)
    contexts: list[np.ndarray] = field(init=False, default_factory=list)
    smoothed: dict[int, float] = field(init=False, default_factory=dict)
    selections: list[int] = field(init=False, default_factory=list)
    rewards: list[float] = field(init=False, default_factory=list)

    def __post_init__(self) -> None:
        if self.n_arms < 1:
            raise InvalidParameterError("A bandit needs at least one arm")
        self.posteriors = [Posterior.prior(self.dim, self.config.lambda_) for _ in range(self.n_arms)]

    def epsilon(self, t: int) -> float:
        return anneal(
            self.config.epsilon0,
            t,
            mode=self.config.decay,
            rate=self.config.decay_rate,
            kappa=self.config.kappa,
        )

    def select(self, x: np.ndarray, t: int) -> int:
        self.contexts.append(x)
        arm = select_arm(self.posteriors, x, self.epsilon(t), self.rng)
        self.selections.append(arm)
        return arm

    def update(self, arm: int, x: np.ndarray, reward: float) -> float:
        if not 0.0 <= reward <= 1.0:
            raise InvalidParameterError(f"Rewards must lie in [0, 1], got {reward}")
        beta = self.config.smoothing
        if beta is not None and arm in self.smoothed:
            reward = beta * reward + (1 - beta) * self.smoothed[arm]
        self.smoothed[arm] = reward
        self.posteriors[arm] = update_posterior(self.posteriors[arm], x, reward)
        self.rewards.append(reward)
        return reward

    def run(self, steps: int, context_at: Callable[[int], np.ndarray], reward_of: Callable[[int, int], float]) -> None:
        for t in range(steps):
            x = context_at(t)
            arm = self.select(x, t)
            self.update(arm, x, reward_of(arm, t))

    def projected_means(self) -> np.ndarray:
        x_bar = np.mean(self.contexts, axis=0) if self.contexts else np.eye(self.dim)[-1]
        return np.array([p.mean @ x_bar for p in self.posteriors])

    def ranking(self, ids: Sequence[str]) -> Ranking:
        """Selected arms by mu . mean context (then count, then index); unselected arms last."""
        scores = self.projected_means()
        counts = [p.count for p in self.posteriors]
        selected = sorted(
            (m for m in range(self.n_arms) if counts[m] > 0),
            key=lambda m: (-round(float(scores[m]), 12), -counts[m], m),
        )
        unselected = [m for m in range(self.n_arms) if counts[m] == 0]
        order = selected + unselected
        return Ranking(
            ids=[ids[m] for m in order],
            scores={ids[m]: float(scores[m]) for m in order},
        )


@dataclass
class LinTSResult:
    ranking: Ranking
    bandit: LinTSBandit
    window_width: int
    f1_terms: list[float] = field(default_factory=list)
    auc_terms: list[float] = field(default_factory=list)


def run_lints(
    config: LinTSConfig,
    pool: Sequence[AnomalyDetector],
    series: TimeSeries,
    labels: LabelsConfig,
    seed: int,
) -> LinTSResult:
    """Bandit over the pool on SBA-injected copies of ``series``.

    ``series`` carries ground-truth labels only in oracle mode; otherwise the
    rewards see synthetic labels at injected points and zeros elsewhere.
    """
    augmented = sba_augment(series, labels, derive_rng(seed, "lints", "inject")).series
    width = config.width or max(2, augmented.length // config.windows)
    if augmented.length < 2 * width:
        raise InsufficientDataError(
            f"LinTS needs at least two windows of width {width}, series has {augmented.length} rows"
        )
    windows = segment(augmented, WindowSpec(width=width, stride=width))
    window_labels = augmented.labels_or_zeros()

    cache: dict[int, np.ndarray] = {}

    def scores_of(arm: int) -> np.ndarray:
        if arm not in cache:
            cache[arm] = pool[arm].normalized_scores(augmented)
        return cache[arm]

    bandit = LinTSBandit(len(pool), config, derive_rng(seed, "lints", "bandit"))
    standardizer = ContextStandardizer()
    recent: deque[slice] = deque(maxlen=config.buffer)
    result = LinTSResult(ranking=Ranking(ids=[]), bandit=bandit, window_width=width)

    def context_at(t: int) -> np.ndarray:
        window = windows[t % len(windows)]
        recent.append(slice(window.start, window.stop))
        return extract_context(window.series.values, standardizer).x

    def reward_of(arm: int, t: int) -> float:
        scores = scores_of(arm)
        current = recent[-1]
        if config.auc_operand == "buffer":
            batch = [(scores[s], window_labels[s]) for s in recent]
        else:
            batch = [(scores[current], window_labels[current])]
        breakdown = compute_reward(scores[current], window_labels[current], batch, config.alpha)
        result.f1_terms.append(breakdown.f1)
        result.auc_terms.append(breakdown.auc_pr)
        return breakdown.reward

    bandit.run(config.windows, context_at, reward_of)
    result.ranking = bandit.ranking([det.id for det in pool])
    logger.info("LinTS ranking after %d windows: %s", config.windows, result.ranking.ids)
    return result
