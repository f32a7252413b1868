"""Range-based event F1, step-rule AUC-PR and best-F1 thresholding."""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from app.core.exceptions import DimensionMismatchError, InvalidParameterError


@dataclass(frozen=True)
class EventSet:
    """Maximal runs of ones as inclusive (start, end) pairs."""

    starts: np.ndarray
    ends: np.ndarray

    @property
    def intervals(self) -> list[tuple[int, int]]:
        return [(int(s), int(e)) for s, e in zip(self.starts, self.ends, strict=True)]

    def __len__(self) -> int:
        return int(self.starts.size)


class EventScore(NamedTuple):
    f1: float
    precision: float
    recall: float


def events_from_binary(vector: np.ndarray) -> EventSet:
    flags = np.asarray(vector).astype(bool).astype(np.int8)
    edges = np.diff(np.concatenate(([0], flags, [0])))
    return EventSet(np.flatnonzero(edges == 1), np.flatnonzero(edges == -1) - 1)


def _prefix(flags: np.ndarray) -> np.ndarray:
    return np.concatenate(([0], np.cumsum(flags, dtype=np.int64)))


def _overlapping(events: EventSet, other_prefix: np.ndarray) -> int:
    if len(events) == 0:
        return 0
    return int(np.count_nonzero(other_prefix[events.ends + 1] - other_prefix[events.starts]))


def _score(
    pred: np.ndarray, truth_events: EventSet, truth_prefix: np.ndarray
) -> EventScore:
    pred_events = events_from_binary(pred)
    n_true, n_pred = len(truth_events), len(pred_events)
    if n_true == 0 and n_pred == 0:
        return EventScore(1.0, 1.0, 1.0)
    if n_true == 0 or n_pred == 0:
        return EventScore(0.0, 0.0, 0.0)
    recall = _overlapping(truth_events, _prefix(pred.astype(np.int8))) / n_true
    precision = _overlapping(pred_events, truth_prefix) / n_pred
    if precision + recall == 0:
        return EventScore(0.0, precision, recall)
    return EventScore(2 * precision * recall / (precision + recall), precision, recall)


def _check_lengths(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape[0] != b.shape[0]:
        raise DimensionMismatchError(expected=a.shape[0], received=b.shape[0], what="entries")


def event_f1(pred: np.ndarray, truth: np.ndarray) -> EventScore:
    """Any-overlap event matching; silent on an event-free truth counts as perfect."""
    pred = np.asarray(pred).astype(bool).reshape(-1)
    truth = np.asarray(truth).astype(bool).reshape(-1)
    _check_lengths(pred, truth)
    return _score(pred, events_from_binary(truth), _prefix(truth.astype(np.int8)))


def auc_pr(scores: np.ndarray, truth: np.ndarray) -> float:
    """Step-rule area under the pointwise precision-recall curve."""
    scores = np.asarray(scores, dtype=np.float64).reshape(-1)
    truth = np.asarray(truth).astype(np.int64).reshape(-1)
    _check_lengths(scores, truth)
    positives = int(truth.sum())
    if positives == 0:
        raise InvalidParameterError("AUC-PR needs at least one positive label")

    order = np.argsort(-scores, kind="stable")
    ordered = scores[order]
    true_positives = np.cumsum(truth[order])
    predicted = np.arange(1, scores.size + 1)
    # Last position of each run of equal scores = one distinct threshold.
    last = np.append(ordered[1:] != ordered[:-1], True)
    precision = true_positives[last] / predicted[last]
    recall = true_positives[last] / positives
    previous = np.concatenate(([0.0], recall[:-1]))
    return float(np.sum((recall - previous) * precision))


def auc_pr_or_zero(scores: np.ndarray, truth: np.ndarray) -> float:
    if not np.any(truth):
        return 0.0
    return auc_pr(scores, truth)


def best_f1_threshold(scores: np.ndarray, truth: np.ndarray) -> tuple[float, float]:
    """Threshold in the distinct score values maximizing event F1; ties go to the smaller one."""
    scores = np.asarray(scores, dtype=np.float64).reshape(-1)
    truth = np.asarray(truth).astype(bool).reshape(-1)
    _check_lengths(scores, truth)
    if scores.size == 0:
        raise InvalidParameterError("Cannot pick a threshold for empty scores")

    truth_events = events_from_binary(truth)
    truth_prefix = _prefix(truth.astype(np.int8))
    best_tau, best_f1 = float("nan"), -1.0
    for tau in np.unique(scores):
        f1 = _score(scores >= tau, truth_events, truth_prefix).f1
        if f1 > best_f1:
            best_tau, best_f1 = float(tau), f1
            if f1 == 1.0:
                break
    return best_tau, best_f1
