"""Level-1 meta-learners over stacked detector scores."""

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from app.core.exceptions import DimensionMismatchError, InvalidParameterError
from app.core.seeding import derive_rng
from app.models.config import LrParams, MetaConfig, MetaLearnerKind, RfParams, SvmParams

logger = logging.getLogger(__name__)


class TrainedMeta(ABC):
    def __init__(self, kind: MetaLearnerKind, n_features: int) -> None:
        self.kind = kind
        self.n_features = n_features

    def predict(self, features: np.ndarray) -> np.ndarray:
        features = np.asarray(features, dtype=np.float64)
        if features.ndim != 2 or features.shape[1] != self.n_features:
            received = features.shape[1] if features.ndim == 2 else features.ndim
            raise DimensionMismatchError(expected=self.n_features, received=received)
        return self._predict(features)

    @abstractmethod
    def _predict(self, features: np.ndarray) -> np.ndarray: ...


class ConstantMeta(TrainedMeta):
    """Predicts the training class prior everywhere (single-class training data)."""

    def __init__(self, kind: MetaLearnerKind, n_features: int, prior: float) -> None:
        super().__init__(kind, n_features)
        self.prior = prior

    def _predict(self, features: np.ndarray) -> np.ndarray:
        return np.full(features.shape[0], self.prior)


class LinearMeta(TrainedMeta):
    def __init__(
        self, kind: MetaLearnerKind, weights: np.ndarray, bias: float
    ) -> None:
        super().__init__(kind, weights.shape[0])
        self.weights = weights
        self.bias = bias

    def _predict(self, features: np.ndarray) -> np.ndarray:
        return expit(features @ self.weights + self.bias)


def logistic_loss(
    weights: np.ndarray, bias: float, features: np.ndarray, labels: np.ndarray, l2: float
) -> float:
    margins = features @ weights + bias
    # log(1 + e^z) - y z, the stable form of binary cross-entropy on logits.
    data = np.mean(np.logaddexp(0.0, margins) - labels * margins)
    return float(data + 0.5 * l2 * weights @ weights)


def logistic_gradient(
    weights: np.ndarray, bias: float, features: np.ndarray, labels: np.ndarray, l2: float
) -> tuple[np.ndarray, float]:
    residual = expit(features @ weights + bias) - labels
    grad_w = features.T @ residual / features.shape[0] + l2 * weights
    return grad_w, float(residual.mean())


def hinge_gradient(
    weights: np.ndarray, bias: float, features: np.ndarray, labels: np.ndarray, l2: float
) -> tuple[np.ndarray, float]:
    signed = 2.0 * labels - 1.0
    active = (signed * (features @ weights + bias) < 1.0) * signed
    grad_w = -(features.T @ active) / features.shape[0] + l2 * weights
    return grad_w, float(-active.mean())


def _train_linear(
    kind: MetaLearnerKind, params: LrParams | SvmParams, features: np.ndarray, labels: np.ndarray
) -> LinearMeta:
    gradient = logistic_gradient if kind is MetaLearnerKind.LR else hinge_gradient
    weights = np.zeros(features.shape[1])
    bias = 0.0
    for _ in range(params.epochs):
        grad_w, grad_b = gradient(weights, bias, features, labels, params.l2)
        weights -= params.learning_rate * grad_w
        bias -= params.learning_rate * grad_b
    return LinearMeta(kind, weights, bias)


@dataclass(frozen=True)
class DecisionTree:
    """Array-encoded binary tree; ``left == -1`` marks a leaf."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    def apply(self, features: np.ndarray) -> np.ndarray:
        node = np.zeros(features.shape[0], dtype=np.int64)
        while True:
            internal = np.flatnonzero(self.left[node] >= 0)
            if internal.size == 0:
                return node
            current = node[internal]
            go_left = features[internal, self.feature[current]] <= self.threshold[current]
            node[internal] = np.where(go_left, self.left[current], self.right[current])

    def predict(self, features: np.ndarray) -> np.ndarray:
        return self.value[self.apply(features)]


def _best_split(
    column: np.ndarray, labels: np.ndarray, min_leaf: int
) -> tuple[float, float] | None:
    """(weighted Gini, threshold) of the best split on one feature, if any is valid."""
    order = np.argsort(column, kind="stable")
    xs, ys = column[order], labels[order]
    n = xs.size
    left_sizes = np.arange(1, n)
    valid = (xs[1:] > xs[:-1]) & (left_sizes >= min_leaf) & (n - left_sizes >= min_leaf)
    if not valid.any():
        return None
    left_pos = np.cumsum(ys)[:-1]
    right_pos = ys.sum() - left_pos
    p_left = left_pos / left_sizes
    p_right = right_pos / (n - left_sizes)
    impurity = (
        left_sizes * 2 * p_left * (1 - p_left)
        + (n - left_sizes) * 2 * p_right * (1 - p_right)
    ) / n
    impurity = np.where(valid, impurity, np.inf)
    i = int(np.argmin(impurity))
    return float(impurity[i]), float((xs[i] + xs[i + 1]) / 2)


def grow_tree(
    features: np.ndarray,
    labels: np.ndarray,
    params: RfParams,
    max_features: int,
    rng: np.random.Generator,
) -> DecisionTree:
    feature: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    value: list[float] = []

    def new_node(rows: np.ndarray) -> int:
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(float(labels[rows].mean()))
        return len(value) - 1

    stack = [(new_node(np.arange(labels.size)), np.arange(labels.size), 0)]
    while stack:
        node, rows, depth = stack.pop()
        purity = value[node]
        if depth >= params.max_depth or rows.size < 2 * params.min_leaf or purity in (0.0, 1.0):
            continue
        best: tuple[float, float, int] | None = None
        for f in rng.choice(features.shape[1], size=max_features, replace=False):
            split = _best_split(features[rows, f], labels[rows], params.min_leaf)
            if split is not None and (best is None or split[0] < best[0]):
                best = (split[0], split[1], int(f))
        if best is None:
            continue
        _, cut, f = best
        goes_left = features[rows, f] <= cut
        feature[node], threshold[node] = f, cut
        left_rows, right_rows = rows[goes_left], rows[~goes_left]
        left[node] = new_node(left_rows)
        right[node] = new_node(right_rows)
        stack.append((right[node], right_rows, depth + 1))
        stack.append((left[node], left_rows, depth + 1))

    return DecisionTree(
        np.array(feature, dtype=np.int64),
        np.array(threshold),
        np.array(left, dtype=np.int64),
        np.array(right, dtype=np.int64),
        np.array(value),
    )


class ForestMeta(TrainedMeta):
    """Fraction of trees whose leaf majority is positive."""

    def __init__(self, n_features: int, trees: list[DecisionTree]) -> None:
        super().__init__(MetaLearnerKind.RF, n_features)
        self.trees = trees

    def _predict(self, features: np.ndarray) -> np.ndarray:
        votes = np.zeros(features.shape[0])
        for tree in self.trees:
            votes += tree.predict(features) > 0.5
        return votes / len(self.trees)


def _train_forest(
    params: RfParams, features: np.ndarray, labels: np.ndarray, seed: int
) -> ForestMeta:
    n, k = features.shape
    max_features = min(k, params.max_features or max(1, math.isqrt(k)))
    trees = []
    for i in range(params.trees):
        rng = derive_rng(seed, "tree", i)
        rows = rng.integers(0, n, size=n) if params.bootstrap else np.arange(n)
        trees.append(grow_tree(features[rows], labels[rows], params, max_features, rng))
    return ForestMeta(k, trees)


def train_meta(
    config: MetaConfig | MetaLearnerKind,
    features: np.ndarray,
    labels: np.ndarray,
    seed: int,
) -> TrainedMeta:
    if isinstance(config, MetaLearnerKind):
        config = MetaConfig(kind=config)
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64).reshape(-1)
    if features.ndim != 2 or features.shape[0] == 0 or features.shape[1] == 0:
        raise InvalidParameterError(f"Meta-learner needs an N x K matrix with N, K >= 1, got {features.shape}")
    if labels.shape[0] != features.shape[0]:
        raise DimensionMismatchError(expected=features.shape[0], received=labels.shape[0], what="labels")

    if np.all(labels == labels[0]):
        logger.warning("Single-class meta training data; using a constant predictor")
        return ConstantMeta(config.kind, features.shape[1], float(labels[0]))
    if config.kind is MetaLearnerKind.RF:
        return _train_forest(config.rf, features, labels, seed)
    params = config.lr if config.kind is MetaLearnerKind.LR else config.svm
    return _train_linear(config.kind, params, features, labels)


def predict_meta(meta: TrainedMeta, features: np.ndarray) -> np.ndarray:
    return meta.predict(features)
