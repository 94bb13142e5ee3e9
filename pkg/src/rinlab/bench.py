"""Benchmark harness: drive headless sessions through measure/cutoff/frame
switches and record per-phase wall-clock medians.

Cells run strictly sequentially. A failing cell is recorded with NaN times
instead of aborting the run.
"""
from __future__ import annotations

import csv
import logging
import statistics
from dataclasses import dataclass
from enum import Enum

from .layout import LayoutParams
from .rin import RinConfig
from .session import (
    EventKind,
    MeasureSelector,
    SessionState,
    UpdateEvent,
    create_session,
    handle_event,
)
from .trajectory import Trajectory

log = logging.getLogger(__name__)

CSV_HEADER = (
    "protein_id,n_nodes,n_edges,event_kind,cutoff,measure,"
    "edge_update_ms,layout_ms,measure_ms,total_ms,repetitions"
)


class BenchEventKind(Enum):
    MEASURE_SWITCH = "MeasureSwitch"
    CUTOFF_SWITCH = "CutoffSwitch"
    FRAME_SWITCH = "FrameSwitch"


@dataclass(frozen=True)
class BenchRecord:
    protein_id: str
    n_nodes: int
    n_edges: int
    event_kind: BenchEventKind
    cutoff: float
    measure: str
    edge_update_ms: float
    layout_ms: float
    measure_ms: float
    total_ms: float
    repetitions: int

    def row(self) -> list:
        return [
            self.protein_id, self.n_nodes, self.n_edges, self.event_kind.value,
            self.cutoff, self.measure, self.edge_update_ms, self.layout_ms,
            self.measure_ms, self.total_ms, self.repetitions,
        ]


def _median_record(protein_id, state: SessionState, kind, cutoff, measure,
                   timings, repetitions) -> BenchRecord:
    return BenchRecord(
        protein_id=protein_id,
        n_nodes=state.rin.node_count,
        n_edges=state.rin.n_edges,
        event_kind=kind,
        cutoff=cutoff,
        measure=measure,
        edge_update_ms=statistics.median(t.edge_update_ms for t in timings),
        layout_ms=statistics.median(t.layout_ms for t in timings),
        measure_ms=statistics.median(t.measure_ms for t in timings),
        total_ms=statistics.median(t.total_ms for t in timings),
        repetitions=repetitions,
    )


def _failed_record(protein_id, kind, cutoff, measure, repetitions) -> BenchRecord:
    nan = float("nan")
    return BenchRecord(protein_id, -1, -1, kind, cutoff, measure,
                       nan, nan, nan, nan, repetitions)


def _alternating(state, event_to, event_back, repetitions):
    """Timings for `event_to`, restoring with `event_back` between reps."""
    timings = []
    for _ in range(repetitions):
        state, timing = handle_event(state, event_to)
        timings.append(timing)
        state, _ = handle_event(state, event_back)
    return state, timings


def run_benchmark(
    trajectory: Trajectory,
    base_config: RinConfig,
    cutoffs: list[float],
    measures: list[str],
    frames: list[int],
    repetitions: int,
    protein_id: str = "synthetic",
    cold: bool = False,
    layout_seed: int = 0,
) -> list[BenchRecord]:
    """Per-phase medians for each (event kind × cutoff × measure) cell.

    ``cold`` disables layout warm starts so every layout regenerates from its
    seeded random initialization, comparable across runs.
    """
    if trajectory.n_frames < 2:
        raise ValueError("benchmark needs a trajectory with at least 2 frames")
    if repetitions < 3:
        raise ValueError("repetitions must be ≥ 3")
    frames = [f for f in frames if 0 <= f < trajectory.n_frames]
    if not frames:
        raise ValueError("no valid frame indices")

    records: list[BenchRecord] = []
    params = LayoutParams(seed=layout_seed)

    for cutoff in cutoffs:
        config = RinConfig(base_config.criterion, cutoff,
                           base_config.exclude_backbone_neighbors)

        for measure in measures:
            # measure switch: flip from a different measure to the target
            other = "degree" if measure != "degree" else "closeness"
            try:
                state = create_session(
                    trajectory, config, MeasureSelector.from_token(other),
                    layout_params=params, warm_layouts=not cold,
                )
                state, timings = _alternating(
                    state,
                    UpdateEvent(EventKind.SET_MEASURE, measure),
                    UpdateEvent(EventKind.SET_MEASURE, other),
                    repetitions,
                )
                records.append(_median_record(
                    protein_id, state, BenchEventKind.MEASURE_SWITCH,
                    cutoff, measure, timings, repetitions,
                ))
            except Exception:
                log.exception("measure-switch cell failed (cutoff=%s measure=%s)",
                              cutoff, measure)
                records.append(_failed_record(
                    protein_id, BenchEventKind.MEASURE_SWITCH, cutoff, measure,
                    repetitions,
                ))

            # cutoff switch: step to the neighboring cutoff and back
            other_cutoff = cutoff + (0.5 if cutoff == min(cutoffs) else -0.5)
            try:
                state = create_session(
                    trajectory, config, MeasureSelector.from_token(measure),
                    layout_params=params, warm_layouts=not cold,
                )
                state, timings = _alternating(
                    state,
                    UpdateEvent(EventKind.SET_CUTOFF, cutoff),
                    UpdateEvent(EventKind.SET_CUTOFF, other_cutoff),
                    repetitions + 1,
                )
                # first rep is an identity switch (already at `cutoff`); drop it
                records.append(_median_record(
                    protein_id, state, BenchEventKind.CUTOFF_SWITCH,
                    cutoff, measure, timings[1:], repetitions,
                ))
            except Exception:
                log.exception("cutoff-switch cell failed (cutoff=%s measure=%s)",
                              cutoff, measure)
                records.append(_failed_record(
                    protein_id, BenchEventKind.CUTOFF_SWITCH, cutoff, measure,
                    repetitions,
                ))

            # frame switch: hop between consecutive benchmark frames
            try:
                state = create_session(
                    trajectory, config, MeasureSelector.from_token(measure),
                    layout_params=params, warm_layouts=not cold,
                )
                target = next((f for f in frames if f != 0), 1)
                state, timings = _alternating(
                    state,
                    UpdateEvent(EventKind.SET_FRAME, target),
                    UpdateEvent(EventKind.SET_FRAME, 0),
                    repetitions,
                )
                records.append(_median_record(
                    protein_id, state, BenchEventKind.FRAME_SWITCH,
                    cutoff, measure, timings, repetitions,
                ))
            except Exception:
                log.exception("frame-switch cell failed (cutoff=%s measure=%s)",
                              cutoff, measure)
                records.append(_failed_record(
                    protein_id, BenchEventKind.FRAME_SWITCH, cutoff, measure,
                    repetitions,
                ))
    return records


def write_csv(records: list[BenchRecord], sink) -> None:
    def _write(fh):
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER.split(","))
        for rec in records:
            writer.writerow(rec.row())

    if hasattr(sink, "write"):
        _write(sink)
    else:
        with open(sink, "w", newline="", encoding="utf-8") as fh:
            _write(fh)
