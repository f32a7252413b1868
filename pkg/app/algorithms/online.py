"""Streaming deployment of both branches with periodic re-optimization."""

import logging
import math
from collections.abc import Callable, Iterable, Iterator, Sequence
from dataclasses import dataclass, field, replace

import numpy as np

from app.algorithms.data import segment
from app.algorithms.detectors.base import AnomalyDetector
from app.algorithms.detectors.pool import expand_window_scores, reduce_windows
from app.algorithms.meta import TrainedMeta
from app.core.exceptions import DimensionMismatchError, InsufficientDataError
from app.models.config import OnlineConfig
from app.models.report import Branch, WindowDecision
from app.models.series import TimeSeries, WindowSpec

logger = logging.getLogger(__name__)


def online_window_spec(length: int, config: OnlineConfig = OnlineConfig()) -> WindowSpec:
    """w = max(2, floor(f_w * L)); step = max(1, round-half-up(f_s * w))."""
    width = max(2, math.floor(config.window_fraction * length))
    if width > length:
        raise InsufficientDataError(f"Online split of {length} rows is shorter than one window of {width}")
    step = max(1, math.floor(config.step_fraction * width + 0.5))
    return WindowSpec(width=width, stride=step)


@dataclass(frozen=True)
class DeployedSingle:
    detector: AnomalyDetector
    threshold: float
    fitness: float

    @property
    def detector_id(self) -> str:
        return self.detector.id

    def scores(self, window: TimeSeries) -> np.ndarray:
        return self.detector.normalized_scores(window)


@dataclass(frozen=True)
class DeployedEnsemble:
    """Subset detectors stacked through the meta-learner at the offline scoring granularity."""

    detectors: list[AnomalyDetector]
    meta: TrainedMeta
    threshold: float
    fitness: float
    scoring: WindowSpec = WindowSpec(width=1)
    reducer: str = "max"

    @property
    def detector_ids(self) -> list[str]:
        return [det.id for det in self.detectors]

    def scores(self, window: TimeSeries) -> np.ndarray:
        timestep = np.column_stack([det.normalized_scores(window) for det in self.detectors])
        if self.scoring.width == 1 and self.scoring.stride == 1:
            return self.meta.predict(timestep)
        reduced = reduce_windows(timestep, self.scoring, "mean" if self.reducer == "mean" else "max")
        return expand_window_scores(self.meta.predict(reduced), self.scoring, window.length)


@dataclass(frozen=True)
class Selection:
    ensemble: DeployedEnsemble
    single: DeployedSingle
    designated: Branch

    @classmethod
    def designate(cls, ensemble: DeployedEnsemble, single: DeployedSingle) -> "Selection":
        """The branch with the higher validation fitness; ties go to the ensemble."""
        branch = Branch.ENSEMBLE if ensemble.fitness >= single.fitness else Branch.SINGLE
        return cls(ensemble, single, branch)


Reoptimizer = Callable[[TimeSeries, int], Selection]


@dataclass(frozen=True)
class OnlineState:
    buffer: TimeSeries
    selection: Selection
    spec: WindowSpec
    config: OnlineConfig
    counter: int = 0
    rounds: int = 0
    pending: tuple[TimeSeries, ...] = field(default=())

    @property
    def period(self) -> int:
        return self.config.period


def init_online(
    selection: Selection,
    offline: TimeSeries,
    online_length: int,
    config: OnlineConfig = OnlineConfig(),
) -> OnlineState:
    return OnlineState(
        buffer=offline,
        selection=selection,
        spec=online_window_spec(online_length, config),
        config=config,
    )


def novel_rows(state: OnlineState, window: TimeSeries) -> TimeSeries:
    """The first window contributes its full width; later ones only the trailing step."""
    if state.counter == 0:
        return window
    return window.slice(window.length - state.spec.stride, window.length)


def assemble_reopt_buffer(buffer: TimeSeries, segments: Sequence[TimeSeries]) -> TimeSeries:
    """Append the novel rows, drop as many from the head; the length never changes."""
    if not segments:
        raise InsufficientDataError("No online windows observed since the last re-optimization")
    values = np.concatenate([s.values for s in segments])
    arrivals = values.shape[0]
    if arrivals == 0:
        return buffer
    labeled = buffer.has_labels or any(s.has_labels for s in segments)
    labels = (
        np.concatenate([buffer.labels_or_zeros(), *(s.labels_or_zeros() for s in segments)])
        if labeled
        else None
    )
    merged_values = np.concatenate([buffer.values, values])[-buffer.length :]
    merged_labels = None if labels is None else labels[-buffer.length :]
    return TimeSeries(buffer.name, merged_values, merged_labels)


def reoptimize(state: OnlineState, reoptimizer: Reoptimizer) -> OnlineState:
    buffer = assemble_reopt_buffer(state.buffer, state.pending)
    round_index = state.rounds + 1
    logger.info("Re-optimization round %d on a buffer of %d rows", round_index, buffer.length)
    selection = reoptimizer(buffer, round_index)
    return replace(state, buffer=buffer, selection=selection, rounds=round_index, pending=())


def step(
    state: OnlineState,
    window: TimeSeries,
    reoptimizer: Reoptimizer,
    feedback_labels: np.ndarray | None = None,
) -> tuple[WindowDecision, OnlineState]:
    if window.length != state.spec.width:
        raise DimensionMismatchError(expected=state.spec.width, received=window.length, what="window rows")
    selection = state.selection
    single_scores = selection.single.scores(window)
    ensemble_scores = selection.ensemble.scores(window)
    single = (single_scores >= selection.single.threshold).astype(int)
    ensemble = (ensemble_scores >= selection.ensemble.threshold).astype(int)
    final = ensemble if selection.designated is Branch.ENSEMBLE else single

    observed = window if feedback_labels is None else window.with_labels(feedback_labels)
    counter = state.counter + 1
    pending = (*state.pending, novel_rows(state, observed)) if state.config.reopt else ()
    advanced = replace(state, counter=counter, pending=pending)
    triggered = state.config.reopt and counter % state.period == 0
    if triggered:
        advanced = reoptimize(advanced, reoptimizer)

    decision = WindowDecision(
        window=state.counter,
        start=state.counter * state.spec.stride,
        single=single.tolist(),
        ensemble=ensemble.tolist(),
        final=final.tolist(),
        single_scores=[float(s) for s in single_scores],
        ensemble_scores=[float(s) for s in ensemble_scores],
        designated=selection.designated,
        reoptimized=triggered,
    )
    return decision, advanced


def online_windows(series: TimeSeries, spec: WindowSpec) -> list[TimeSeries]:
    return [window.series for window in segment(series, spec)]


def replay(
    state: OnlineState,
    windows: Iterable[TimeSeries],
    reoptimizer: Reoptimizer,
    feedback: Iterable[np.ndarray | None] | None = None,
) -> Iterator[tuple[WindowDecision, OnlineState]]:
    """Advance ``state`` through ``windows``, yielding each decision with the new state."""
    labels = iter(feedback) if feedback is not None else None
    for window in windows:
        feedback_labels = next(labels) if labels is not None else None
        decision, state = step(state, window, reoptimizer, feedback_labels)
        yield decision, state


def timestep_decisions(decisions: Sequence[WindowDecision], stride: int) -> dict[str, np.ndarray]:
    """Per-timestep branch decisions from the novel rows of each window."""
    out: dict[str, list[int]] = {"single": [], "ensemble": [], "final": []}
    for i, decision in enumerate(decisions):
        for branch in out:
            values: list[int] = getattr(decision, branch)
            out[branch].extend(values if i == 0 else values[-stride:])
    return {branch: np.array(values, dtype=np.int8) for branch, values in out.items()}
