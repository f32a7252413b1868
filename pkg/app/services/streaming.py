import logging
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from app.algorithms.detectors.base import AnomalyDetector
from app.algorithms.metrics import event_f1
from app.algorithms.online import (
    OnlineState,
    Selection,
    init_online,
    online_windows,
    replay,
    timestep_decisions,
)
from app.core.seeding import derive_seed
from app.models.report import BranchF1, OnlineSummary, WindowDecision
from app.models.series import TimeSeries
from app.services.selection import OfflineSelection, SelectionService

logger = logging.getLogger(__name__)


@dataclass
class OnlineRun:
    offline: OfflineSelection
    decisions: list[WindowDecision]
    summary: OnlineSummary
    state: OnlineState


class StreamingService:
    """Replays the online split against the offline selection, re-optimizing every N windows."""

    def __init__(self, selection_service: SelectionService) -> None:
        self.selection_service = selection_service
        self.config = selection_service.config
        self.writer = selection_service.writer

    def run_online(
        self,
        series: TimeSeries,
        offline: OfflineSelection | None = None,
        *,
        detectors: Sequence[AnomalyDetector] | None = None,
    ) -> OnlineRun:
        service = self.selection_service
        if offline is None:
            offline = service.run_offline(series, detectors=detectors)
        if offline.offline is None or offline.online is None:
            offline.offline, offline.online = service.split(series)
        online = offline.online

        def reoptimizer(buffer: TimeSeries, round_index: int) -> Selection:
            seed = derive_seed(service.seed, "reopt", round_index)
            return service.select(buffer, seed=seed, detectors=detectors).selection

        state = init_online(offline.selection, service.redact(offline.offline), online.length, self.config.online)
        windows = online_windows(online.without_labels(), state.spec)
        feedback = self._feedback(online, state)

        decisions: list[WindowDecision] = []
        buffer_lengths = [state.buffer.length]
        for decision, state in replay(state, windows, reoptimizer, feedback):
            decisions.append(decision)
            self.writer.append("decisions", decision)
            if decision.reoptimized:
                buffer_lengths.append(state.buffer.length)

        summary = self._summary(decisions, state, online, buffer_lengths)
        self.writer.write("online_summary", [summary])
        logger.info(
            "Online run: %d windows, %d re-optimizations", summary.windows, summary.reoptimizations
        )
        return OnlineRun(offline, decisions, summary, state)

    def _feedback(self, online: TimeSeries, state: OnlineState) -> list[np.ndarray | None] | None:
        """Online labels become feedback only in oracle mode."""
        if self.config.labels.mode != "ground_truth" or online.labels is None:
            return None
        labels = online.labels
        width, stride = state.spec.width, state.spec.stride
        return [labels[start : start + width] for start in range(0, online.length - width + 1, stride)]

    def _summary(
        self,
        decisions: list[WindowDecision],
        state: OnlineState,
        online: TimeSeries,
        buffer_lengths: list[int],
    ) -> OnlineSummary:
        summary = OnlineSummary(
            windows=len(decisions),
            window_width=state.spec.width,
            step=state.spec.stride,
            reoptimizations=sum(d.reoptimized for d in decisions),
            buffer_lengths=buffer_lengths,
            f1_available=online.labels is not None,
        )
        if online.labels is None or not decisions:
            return summary
        flags = timestep_decisions(decisions, state.spec.stride)
        truth = online.labels[: flags["final"].size]
        summary.f1 = BranchF1(
            single=event_f1(flags["single"], truth).f1,
            ensemble=event_f1(flags["ensemble"], truth).f1,
            final=event_f1(flags["final"], truth).f1,
        )
        return summary
