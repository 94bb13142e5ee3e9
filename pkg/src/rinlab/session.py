"""Interactive exploration sessions: a functional state machine over
(frame, cutoff, criterion, measure) with per-phase timing.

States are immutable; every event produces a fresh, fully consistent state
(copy-on-update), so a failed event leaves the previous snapshot intact and
readers never observe partial updates. The maxent layout is warm-started from
the frame's rescaled CA coordinates, which both speeds it up and keeps the
final state a pure function of the current parameters (event-order
independent).
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Union

import numpy as np

from .analytics import (
    ClosenessVariant,
    CommunityMethod,
    Measure,
    NodeScores,
    Partition,
    betweenness,
    closeness,
    community_detect,
    degree,
    pagerank,
)
from .errors import InvalidPayload
from .layout import Layout3D, LayoutParams, maxent_stress_layout, protein_layout, warm_start_from_points
from .rin import (
    CUTOFF_SLIDER_MAX,
    CUTOFF_SLIDER_MIN,
    CUTOFF_SLIDER_STEP,
    DistanceCriterion,
    Rin,
    RinConfig,
    apply_cutoff_change,
    build_rin,
)
from .trajectory import Trajectory

_MEASURE_TOKENS = {m.value: m for m in Measure} | {c.value: c for c in CommunityMethod}


@dataclass(frozen=True)
class MeasureSelector:
    """Scalar centrality or community method, with community knobs."""

    kind: Union[Measure, CommunityMethod]
    gamma: float = 1.0
    seed: int = 0

    @property
    def is_community(self) -> bool:
        return isinstance(self.kind, CommunityMethod)

    @property
    def token(self) -> str:
        return self.kind.value

    @classmethod
    def from_token(cls, token: str, gamma: float = 1.0, seed: int = 0) -> "MeasureSelector":
        kind = _MEASURE_TOKENS.get(token)
        if kind is None:
            raise InvalidPayload(f"unknown measure {token!r}")
        return cls(kind, gamma, seed)


class EventKind(Enum):
    SET_FRAME = "set_frame"
    SET_CUTOFF = "set_cutoff"
    SET_CRITERION = "set_criterion"
    SET_MEASURE = "set_measure"
    TOGGLE_AUTO = "toggle_auto"
    TOGGLE_DELTA = "toggle_delta"
    RECOMPUTE = "recompute"
    GET_SNAPSHOT = "get_snapshot"


@dataclass(frozen=True)
class UpdateEvent:
    kind: EventKind
    value: object = None


@dataclass(frozen=True)
class TimingBreakdown:
    edge_update_ms: float = 0.0
    layout_ms: float = 0.0
    measure_ms: float = 0.0
    total_ms: float = 0.0

    def as_dict(self) -> dict:
        return {
            "edge_update_ms": self.edge_update_ms,
            "layout_ms": self.layout_ms,
            "measure_ms": self.measure_ms,
            "total_ms": self.total_ms,
        }


@dataclass(frozen=True)
class PendingChanges:
    """Requested parameters not yet applied (on-demand recompute mode)."""

    config: RinConfig
    frame_index: int
    measure: MeasureSelector


@dataclass(frozen=True, eq=False)
class SessionState:
    trajectory: Trajectory
    config: RinConfig
    frame_index: int
    measure: MeasureSelector
    rin: Rin
    scores: Union[NodeScores, Partition]
    protein: Layout3D
    maxent: Layout3D
    score_buffer: NodeScores | None = None
    auto_recompute: bool = True
    delta_view: bool = False
    pending: PendingChanges | None = None
    last_timing: TimingBreakdown = field(default_factory=TimingBreakdown)
    layout_params: LayoutParams = field(default_factory=LayoutParams)
    warm_layouts: bool = True

    @property
    def stale(self) -> bool:
        return self.pending is not None


def _compute_scores(rin: Rin, selector: MeasureSelector):
    if selector.is_community:
        return community_detect(rin, selector.kind, selector.gamma, selector.seed)
    if selector.kind is Measure.DEGREE:
        return degree(rin)
    if selector.kind is Measure.CLOSENESS:
        return closeness(rin, ClosenessVariant.HARMONIC)
    if selector.kind is Measure.BETWEENNESS:
        return betweenness(rin)
    if selector.kind is Measure.PAGERANK:
        return pagerank(rin)
    return pagerank(rin, normalized=True)


def _compute_maxent(protein: Layout3D, rin: Rin,
                    params: LayoutParams, warm: bool) -> Layout3D:
    warm_start = (
        warm_start_from_points(protein.coords, rin, params) if warm else None
    )
    return maxent_stress_layout(rin, params, warm_start=warm_start)


def create_session(
    trajectory: Trajectory,
    config: RinConfig,
    measure: MeasureSelector,
    layout_params: LayoutParams = LayoutParams(),
    warm_layouts: bool = True,
) -> SessionState:
    """Session at frame 0 with RIN, both layouts, and scores computed."""
    frame = trajectory.frames[0]
    rin = build_rin(frame, trajectory.topology, config)
    protein = protein_layout(frame, trajectory.topology)
    maxent = _compute_maxent(protein, rin, layout_params, warm_layouts)
    scores = _compute_scores(rin, measure)
    return SessionState(
        trajectory=trajectory,
        config=config,
        frame_index=0,
        measure=measure,
        rin=rin,
        scores=scores,
        protein=protein,
        maxent=maxent,
        layout_params=layout_params,
        warm_layouts=warm_layouts,
    )


def _validated_frame(state: SessionState, value) -> int:
    if not isinstance(value, int) or isinstance(value, bool):
        raise InvalidPayload(f"frame index must be an integer, got {value!r}")
    if not 0 <= value < state.trajectory.n_frames:
        raise InvalidPayload(
            f"frame {value} out of range [0, {state.trajectory.n_frames})"
        )
    return value


def _validated_cutoff(value) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InvalidPayload(f"cutoff must be a number, got {value!r}")
    value = float(value)
    if not (np.isfinite(value) and value > 0):
        raise InvalidPayload(f"cutoff must be positive and finite, got {value}")
    return value


def _validated_criterion(value) -> DistanceCriterion:
    if isinstance(value, DistanceCriterion):
        return value
    try:
        return DistanceCriterion(value)
    except ValueError:
        raise InvalidPayload(f"unknown criterion {value!r}") from None


def _validated_measure(value) -> MeasureSelector:
    if isinstance(value, MeasureSelector):
        return value
    if isinstance(value, str):
        return MeasureSelector.from_token(value)
    if isinstance(value, dict):
        try:
            return MeasureSelector.from_token(
                value["measure"],
                gamma=float(value.get("gamma", 1.0)),
                seed=int(value.get("seed", 0)),
            )
        except (KeyError, TypeError, ValueError):
            raise InvalidPayload(f"bad measure payload {value!r}") from None
    raise InvalidPayload(f"bad measure payload {value!r}")


def _toggle_value(current: bool, value) -> bool:
    if value is None:
        return not current
    if isinstance(value, bool):
        return value
    raise InvalidPayload(f"toggle payload must be true/false/null, got {value!r}")


def _buffering(old_scores, old_buffer, new_measure, old_measure):
    """Previous scalar scores become the delta buffer; measure switches clear it."""
    if new_measure != old_measure:
        return None
    if isinstance(old_scores, NodeScores):
        return old_scores
    return old_buffer


def _apply_parameters(
    state: SessionState,
    config: RinConfig,
    frame_index: int,
    measure: MeasureSelector,
) -> tuple[SessionState, float, float, float]:
    """Recompute exactly the phases invalidated by the parameter diff."""
    rin = state.rin
    protein = state.protein
    maxent = state.maxent
    edge_ms = layout_ms = measure_ms = 0.0
    frame_changed = frame_index != state.frame_index
    criterion_changed = (
        config.criterion != state.config.criterion
        or config.exclude_backbone_neighbors != state.config.exclude_backbone_neighbors
    )
    cutoff_changed = config.cutoff != state.config.cutoff
    measure_changed = measure != state.measure
    frame = state.trajectory.frames[frame_index]

    if frame_changed or criterion_changed:
        t0 = time.perf_counter()
        rin = build_rin(frame, state.trajectory.topology, config)
        edge_ms = (time.perf_counter() - t0) * 1e3
    elif cutoff_changed:
        t0 = time.perf_counter()
        rin, _ = apply_cutoff_change(rin, frame, state.trajectory.topology, config.cutoff)
        edge_ms = (time.perf_counter() - t0) * 1e3

    if frame_changed or criterion_changed or cutoff_changed:
        t0 = time.perf_counter()
        if frame_changed:
            protein = protein_layout(frame, state.trajectory.topology)
        maxent = _compute_maxent(protein, rin, state.layout_params, state.warm_layouts)
        layout_ms = (time.perf_counter() - t0) * 1e3

    scores = state.scores
    buffer = state.score_buffer
    if frame_changed or criterion_changed or cutoff_changed or measure_changed:
        t0 = time.perf_counter()
        scores = _compute_scores(rin, measure)
        measure_ms = (time.perf_counter() - t0) * 1e3
        buffer = _buffering(state.scores, state.score_buffer, measure, state.measure)

    delta_view = state.delta_view and not measure.is_community
    new_state = replace(
        state,
        config=config,
        frame_index=frame_index,
        measure=measure,
        rin=rin,
        scores=scores,
        protein=protein,
        maxent=maxent,
        score_buffer=buffer,
        delta_view=delta_view,
        pending=None,
    )
    return new_state, edge_ms, layout_ms, measure_ms


def handle_event(state: SessionState, ev: UpdateEvent) -> tuple[SessionState, TimingBreakdown]:
    """Apply one event; returns the committed state and wall-clock phase times."""
    t_start = time.perf_counter()
    edge_ms = layout_ms = measure_ms = 0.0

    base = state.pending or PendingChanges(state.config, state.frame_index, state.measure)
    target = None
    if ev.kind is EventKind.SET_FRAME:
        target = replace(base, frame_index=_validated_frame(state, ev.value))
    elif ev.kind is EventKind.SET_CUTOFF:
        target = replace(base, config=replace(base.config, cutoff=_validated_cutoff(ev.value)))
    elif ev.kind is EventKind.SET_CRITERION:
        target = replace(
            base, config=replace(base.config, criterion=_validated_criterion(ev.value))
        )
    elif ev.kind is EventKind.SET_MEASURE:
        target = replace(base, measure=_validated_measure(ev.value))
    elif ev.kind is EventKind.RECOMPUTE:
        target = base
    elif ev.kind is EventKind.TOGGLE_AUTO:
        auto = _toggle_value(state.auto_recompute, ev.value)
        state = replace(state, auto_recompute=auto)
        if auto and state.pending is not None:
            target = state.pending
    elif ev.kind is EventKind.TOGGLE_DELTA:
        want = _toggle_value(state.delta_view, ev.value)
        if want and (state.measure.is_community or isinstance(state.scores, Partition)):
            want = False  # partitions have no meaningful subtraction
        state = replace(state, delta_view=want)
    elif ev.kind is EventKind.GET_SNAPSHOT:
        pass
    else:
        raise InvalidPayload(f"unknown event kind {ev.kind!r}")

    if target is not None:
        mutating = ev.kind in (EventKind.RECOMPUTE, EventKind.TOGGLE_AUTO)
        if state.auto_recompute or mutating:
            changed = (
                target.config != state.config
                or target.frame_index != state.frame_index
                or target.measure != state.measure
            )
            if changed:
                state, edge_ms, layout_ms, measure_ms = _apply_parameters(
                    state, target.config, target.frame_index, target.measure
                )
            else:
                state = replace(state, pending=None)
        else:
            changed = (
                target.config != state.config
                or target.frame_index != state.frame_index
                or target.measure != state.measure
            )
            state = replace(state, pending=target if changed else None)

    total_ms = (time.perf_counter() - t_start) * 1e3
    timing = TimingBreakdown(edge_ms, layout_ms, measure_ms, total_ms)
    if ev.kind is not EventKind.GET_SNAPSHOT:
        state = replace(state, last_timing=timing)
    return state, timing


_SPECTRAL_STOPS = (
    (0.00, (0x32, 0x88, 0xBD)),  # blue
    (0.25, (0x99, 0xD5, 0x94)),
    (0.50, (0xFF, 0xFF, 0xBF)),  # pale yellow midpoint
    (0.75, (0xFD, 0xAE, 0x61),),
    (1.00, (0xD5, 0x3E, 0x4F)),  # red
)


def spectral_color(t: float) -> str:
    """Interpolated blue→red spectral palette position t ∈ [0, 1] as #rrggbb."""
    t = min(max(float(t), 0.0), 1.0)
    for (t0, c0), (t1, c1) in zip(_SPECTRAL_STOPS, _SPECTRAL_STOPS[1:]):
        if t <= t1:
            f = 0.0 if t1 == t0 else (t - t0) / (t1 - t0)
            rgb = tuple(round(a + (b - a) * f) for a, b in zip(c0, c1))
            return "#{:02x}{:02x}{:02x}".format(*rgb)
    return "#d53e4f"


def color_positions(values: np.ndarray) -> np.ndarray:
    """Min-max normalize onto [0, 1]; constant input maps to the midpoint."""
    values = np.asarray(values, dtype=np.float64)
    if len(values) == 0:
        return values
    lo, hi = float(values.min()), float(values.max())
    if hi == lo:
        return np.full(len(values), 0.5)
    return (values - lo) / (hi - lo)


def display_scores(state: SessionState):
    """Scores shown to the client: the delta view when armed, else current."""
    if (
        state.delta_view
        and isinstance(state.scores, NodeScores)
        and state.score_buffer is not None
        and len(state.score_buffer) == len(state.scores)
    ):
        return state.scores.values - state.score_buffer.values
    if isinstance(state.scores, Partition):
        return state.scores.labels.astype(np.float64)
    return state.scores.values


def snapshot(state: SessionState) -> dict:
    """Wire document for the committed state (see the session wire protocol)."""
    shown = display_scores(state)
    positions = color_positions(shown)
    colors = [spectral_color(t) for t in positions]
    return {
        "type": "snapshot",
        "nodes": [res.label for res in state.trajectory.residues],
        "edges": [[int(i), int(j)] for i, j in zip(state.rin.edges_i, state.rin.edges_j)],
        "protein_layout": state.protein.coords.tolist(),
        "maxent_layout": state.maxent.coords.tolist(),
        "scores": shown.tolist(),
        "colors": colors,
        "timing": state.last_timing.as_dict(),
        "stale": state.stale,
        "state": {
            "frame": state.frame_index,
            "frame_count": state.trajectory.n_frames,
            "cutoff": state.config.cutoff,
            "criterion": state.config.criterion.value,
            "exclude_backbone_neighbors": state.config.exclude_backbone_neighbors,
            "measure": state.measure.token,
            "gamma": state.measure.gamma,
            "auto_recompute": state.auto_recompute,
            "delta_view": state.delta_view,
            "is_partition": isinstance(state.scores, Partition),
            "cutoff_min": CUTOFF_SLIDER_MIN,
            "cutoff_max": CUTOFF_SLIDER_MAX,
            "cutoff_step": CUTOFF_SLIDER_STEP,
            "measures": sorted(_MEASURE_TOKENS),
            "criteria": [c.value for c in DistanceCriterion],
        },
    }
