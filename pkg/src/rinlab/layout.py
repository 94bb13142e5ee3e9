"""3D node layouts: protein-coordinate placement and maxent-stress embedding.

The maxent-stress objective over node positions x is

    H(x) = Σ_{ij in E} (1/d²)·(‖x_i−x_j‖ − d)²  −  α Σ_{ij not in E} ln ‖x_i−x_j‖

with target edge length d, solved by Jacobi-style majorization rounds while α
anneals geometrically down to a floor. Rounds are single-threaded in both
kernel backends, so a fixed seed gives bit-identical output regardless of
thread count.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING

import numpy as np

from . import _kernels
from .errors import CoincidentPoints
from .rin import _ca_points
from .trajectory import Frame, Topology

if TYPE_CHECKING:
    from .rin import Rin

# above this node count the entropy term switches to the grid approximation;
# correctness tests never rely on the approximate path
EXACT_ENTROPY_MAX_NODES = 2048

_COINCIDENT_EPS = 1e-9
_JITTER_MAGNITUDE = 1e-6


class LayoutKind(Enum):
    PROTEIN = "protein"
    MAXENT_STRESS = "maxent"


@dataclass(frozen=True, eq=False)
class Layout3D:
    coords: np.ndarray  # (n, 3) float64; Å for PROTEIN, unitless otherwise
    kind: LayoutKind

    def __post_init__(self):
        if self.coords.ndim != 2 or self.coords.shape[1] != 3:
            raise ValueError(f"expected (n, 3) coordinates, got {self.coords.shape}")
        if not np.all(np.isfinite(self.coords)):
            raise ValueError("non-finite layout coordinate")

    def __len__(self) -> int:
        return len(self.coords)


@dataclass(frozen=True)
class LayoutParams:
    target_edge_length: float = 1.0
    alpha_init: float = 1.0
    alpha_decay: float = 0.3
    alpha_min: float = 0.008
    max_rounds: int = 50
    tol: float = 1e-3
    seed: int = 0
    q: float = 0.0

    def __post_init__(self):
        if not 0 < self.alpha_decay < 1:
            raise ValueError("alpha_decay must be in (0, 1)")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.max_rounds < 1:
            raise ValueError("max_rounds must be ≥ 1")
        if self.target_edge_length <= 0:
            raise ValueError("target_edge_length must be positive")
        if self.q != 0.0:
            raise ValueError("only the logarithmic entropy term (q=0) is implemented")


def protein_layout(frame: Frame, topology: Topology) -> Layout3D:
    """Node positions = CA atom positions, in Å."""
    return Layout3D(_ca_points(frame, topology).copy(), LayoutKind.PROTEIN)


def _jitter_coincident(coords: np.ndarray, seed: int) -> np.ndarray:
    """Separate points closer than ~1e-9 with deterministic 1e-6 offsets."""
    for _ in range(4):
        cells = np.round(coords / _COINCIDENT_EPS).astype(np.int64)
        _, first, inverse, counts = np.unique(
            cells, axis=0, return_index=True, return_inverse=True, return_counts=True
        )
        clashing = counts[inverse] > 1
        keep = np.zeros(len(coords), dtype=bool)
        keep[first] = True
        move = np.flatnonzero(clashing & ~keep)
        if len(move) == 0:
            return coords
        for idx in move:
            direction = np.random.default_rng([seed, int(idx)]).normal(size=3)
            coords[idx] = coords[idx] + _JITTER_MAGNITUDE * direction / np.linalg.norm(direction)
    return coords


def _repulsion_pairs(rin: Rin, coords: np.ndarray, params: LayoutParams, kern):
    """Non-edge candidate pairs for the approximate entropy term.

    Radius capped so the candidate list stays bounded even for dense point
    clouds; purely an approximation knob, never used below the exact-path
    node limit.
    """
    n = len(coords)
    span = np.ptp(coords, axis=0)
    volume = float(np.prod(np.maximum(span, 1e-6)))
    budget = 4_000_000.0
    r_cap = (3.0 * budget * volume / (4.0 * np.pi * n * n)) ** (1.0 / 3.0)
    radius = min(4.0 * params.target_edge_length, max(r_cap, params.target_edge_length))
    pi, pj, _ = kern.point_pairs(np.ascontiguousarray(coords), radius)
    if len(pi) == 0:
        return pi, pj
    keys = pi.astype(np.int64) * n + pj
    is_edge = np.isin(keys, rin.edge_keys(), assume_unique=True)
    return pi[~is_edge], pj[~is_edge]


def _component_labels(rin: Rin) -> np.ndarray:
    from .rin import connected_components

    return connected_components(rin).labels.astype(np.int32)


def maxent_step(
    rin: Rin,
    coords: np.ndarray,
    params: LayoutParams,
    alpha: float,
    backend: str | None = None,
    comp: np.ndarray | None = None,
) -> np.ndarray:
    """One majorization round at fixed α; exact entropy below the size limit.

    The entropy term repels non-edge pairs within a connected component; the
    relative placement of components is the packing step's job (the exact
    objective is unbounded across components).
    """
    kern = _kernels.get_backend(backend)
    d = params.target_edge_length
    if comp is None:
        comp = _component_labels(rin)
    if alpha == 0.0 or rin.node_count <= EXACT_ENTROPY_MAX_NODES:
        return kern.maxent_round(coords, rin.indptr, rin.indices, d, alpha, comp,
                                 _COINCIDENT_EPS)
    rep_i, rep_j = _repulsion_pairs(rin, coords, params, kern)
    same = comp[rep_i] == comp[rep_j]
    return kern.maxent_round_pairs(coords, rin.indptr, rin.indices, d, alpha,
                                   rep_i[same], rep_j[same], _COINCIDENT_EPS)


def _pack_components(coords: np.ndarray, comp: np.ndarray, d: float) -> np.ndarray:
    """Translate each component onto a deterministic grid so they don't overlap."""
    k = int(comp.max()) + 1
    if k <= 1:
        return coords
    extents = np.empty(k)
    centroids = np.empty((k, 3))
    for c in range(k):
        members = comp == c
        pts = coords[members]
        centroids[c] = pts.mean(axis=0)
        extents[c] = float(np.max(np.ptp(pts, axis=0))) if len(pts) > 1 else 0.0
    spacing = float(extents.max()) + 2.0 * d
    per_axis = int(np.ceil(k ** (1.0 / 3.0)))
    out = coords.copy()
    for c in range(k):
        target = spacing * np.array(
            [c % per_axis, (c // per_axis) % per_axis, c // (per_axis * per_axis)],
            dtype=np.float64,
        )
        out[comp == c] += target - centroids[c]
    return out


def maxent_stress_layout(
    rin: Rin,
    params: LayoutParams = LayoutParams(),
    warm_start: Layout3D | None = None,
    backend: str | None = None,
) -> Layout3D:
    """Anneal majorization rounds until mean movement < tol·d or max_rounds.

    Initialization is ``warm_start`` if given (α then starts at its floor, so
    a converged layout re-converges within one round), else seeded uniform
    points in the unit cube.
    """
    coords, _ = _solve(rin, params, warm_start, backend)
    return Layout3D(coords, LayoutKind.MAXENT_STRESS)


def _solve(rin, params, warm_start, backend):
    n = rin.node_count
    if warm_start is not None:
        if len(warm_start) != n:
            raise ValueError(f"warm start has {len(warm_start)} nodes, graph has {n}")
        coords = warm_start.coords.astype(np.float64).copy()
        alpha = params.alpha_min
    else:
        coords = np.random.default_rng(params.seed).random((n, 3))
        alpha = params.alpha_init
    coords = _jitter_coincident(coords, params.seed)

    d = params.target_edge_length
    comp = _component_labels(rin)
    rounds = 0
    for _ in range(params.max_rounds):
        new_coords = maxent_step(rin, coords, params, alpha, backend, comp)
        movement = float(np.mean(np.linalg.norm(new_coords - coords, axis=1))) / d
        coords = new_coords
        rounds += 1
        alpha = max(alpha * params.alpha_decay, params.alpha_min)
        if movement < params.tol:
            break
    return _pack_components(coords, comp, d), rounds


def warm_start_from_points(points: np.ndarray, rin: Rin, params: LayoutParams) -> Layout3D:
    """Rescale external coordinates (e.g. CA positions) into layout space.

    The scale maps the mean edge length onto the target edge length, giving a
    deterministic warm start that depends only on the points and the graph.
    """
    coords = np.asarray(points, dtype=np.float64).copy()
    if rin.n_edges:
        vec = coords[rin.edges_i] - coords[rin.edges_j]
        mean_len = float(np.mean(np.sqrt(np.einsum("ij,ij->i", vec, vec))))
        if mean_len > 0:
            coords *= params.target_edge_length / mean_len
    return Layout3D(coords, LayoutKind.MAXENT_STRESS)


def stress_energy(rin: Rin, layout: Layout3D, params: LayoutParams, alpha: float) -> float:
    """Evaluate H(x) exactly (all pairs for the entropy term)."""
    coords = layout.coords
    n = rin.node_count
    if len(layout) != n:
        raise ValueError(f"layout has {len(layout)} nodes, graph has {n}")
    d = params.target_edge_length
    total = 0.0
    if rin.n_edges:
        vec = coords[rin.edges_i] - coords[rin.edges_j]
        dist = np.sqrt(np.einsum("ij,ij->i", vec, vec))
        if np.any(dist < 1e-12):
            raise CoincidentPoints("coincident edge endpoints")
        total += float(np.sum((dist - d) ** 2) / (d * d))
    if alpha != 0.0 and n > 1:
        edge_keys = rin.edge_keys()
        log_sum = 0.0
        for i in range(n - 1):
            vec = coords[i + 1:] - coords[i]
            dist2 = np.einsum("ij,ij->i", vec, vec)
            keys = np.int64(i) * n + np.arange(i + 1, n, dtype=np.int64)
            non_edge = ~np.isin(keys, edge_keys, assume_unique=True)
            if np.any(dist2[non_edge] < 1e-24):
                raise CoincidentPoints(f"coincident non-edge pair involving node {i}")
            log_sum += float(np.sum(np.log(dist2[non_edge]))) * 0.5
        total -= alpha * log_sum
    return total
