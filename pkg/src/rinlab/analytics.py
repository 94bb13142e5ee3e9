"""Node centralities, community detection entry points, and partition metrics.

All operations are pure functions of an immutable RIN and deterministic: the
same graph always yields bit-identical scores.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING

import numpy as np

from . import _kernels, community as _community
from .community import canonical_labels
from .errors import LengthMismatch, MeasureMismatch

if TYPE_CHECKING:
    from .rin import Rin

__all__ = [
    "Measure", "CommunityMethod", "ClosenessVariant", "NodeScores", "Partition",
    "degree", "betweenness", "closeness", "pagerank", "community_detect",
    "modularity", "nmi", "score_delta", "canonical_labels",
]

PAGERANK_MAX_ITER = 200


class Measure(Enum):
    DEGREE = "degree"
    CLOSENESS = "closeness"
    BETWEENNESS = "betweenness"
    PAGERANK = "pagerank"
    PAGERANK_NORMALIZED = "pagerank-norm"


class CommunityMethod(Enum):
    PLM = "plm"
    LEIDEN = "leiden"


class ClosenessVariant(Enum):
    HARMONIC = "harmonic"
    COMPONENT_RESTRICTED = "component"


@dataclass(frozen=True, eq=False)
class NodeScores:
    measure_id: Measure
    values: np.ndarray  # float64, one per node
    converged: bool = True

    def __post_init__(self):
        if not np.all(np.isfinite(self.values)):
            raise ValueError(f"{self.measure_id.value}: non-finite score")

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True, eq=False)
class Partition:
    labels: np.ndarray  # int64, one per node
    community_count: int

    def __post_init__(self):
        if len(self.labels):
            lo, hi = int(self.labels.min()), int(self.labels.max())
            if lo < 0 or hi >= self.community_count:
                raise ValueError("labels out of range")
            if len(np.unique(self.labels)) != self.community_count:
                raise ValueError("unused community labels")
        elif self.community_count != 0:
            raise ValueError("empty partition with nonzero community count")

    def __len__(self) -> int:
        return len(self.labels)


def degree(rin: Rin) -> NodeScores:
    return NodeScores(Measure.DEGREE, rin.degrees.astype(np.float64))


def betweenness(rin: Rin, normalized: bool = False, backend: str | None = None) -> NodeScores:
    """Exact betweenness: unordered pairs, endpoints excluded, unnormalized
    unless ``normalized`` divides by (n-1)(n-2)/2."""
    kern = _kernels.get_backend(backend)
    values = kern.betweenness(rin.indptr, rin.indices, rin.node_count)
    n = rin.node_count
    if normalized and n > 2:
        values = values / ((n - 1) * (n - 2) / 2.0)
    return NodeScores(Measure.BETWEENNESS, values)


def closeness(
    rin: Rin,
    variant: ClosenessVariant = ClosenessVariant.HARMONIC,
    backend: str | None = None,
) -> NodeScores:
    """Harmonic closeness (default) or the component-restricted variant.

    Harmonic: C(v) = (Σ_{u≠v} 1/d(v,u)) / (n-1), with 1/∞ = 0.
    Component-restricted: C(v) = (r-1)/Σd scaled by (r-1)/(n-1) over v's
    component of size r; isolated nodes score 0 under both.
    """
    kern = _kernels.get_backend(backend)
    n = rin.node_count
    harm, dsum, reach = kern.closeness_sums(rin.indptr, rin.indices, n)
    if n <= 1:
        return NodeScores(Measure.CLOSENESS, np.zeros(n, dtype=np.float64))
    if variant is ClosenessVariant.HARMONIC:
        values = harm / (n - 1)
    else:
        r1 = reach.astype(np.float64)  # r - 1
        values = np.divide(r1 * r1, dsum * (n - 1), out=np.zeros(n), where=dsum > 0)
    return NodeScores(Measure.CLOSENESS, values)


def pagerank(
    rin: Rin,
    damping: float = 0.85,
    tol: float = 1e-9,
    normalized: bool = False,
) -> NodeScores:
    """Power-iteration PageRank over the undirected graph.

    Isolated (dangling) nodes distribute their mass uniformly to all nodes.
    Stops when the L1 change drops below ``tol`` or after 200 iterations (in
    which case the last iterate is returned with ``converged=False``). Raw
    scores sum to 1; ``normalized`` divides by the lower bound (1-damping)/n
    so every score is ≥ 1 and comparable across graphs.
    """
    if not 0 < damping < 1:
        raise ValueError("damping must be in (0, 1)")
    if tol <= 0:
        raise ValueError("tol must be positive")
    n = rin.node_count
    measure = Measure.PAGERANK_NORMALIZED if normalized else Measure.PAGERANK
    if n == 0:
        return NodeScores(measure, np.zeros(0))
    adjacency = rin.adjacency_matrix()
    deg = rin.degrees.astype(np.float64)
    dangling = deg == 0
    safe_deg = np.where(dangling, 1.0, deg)
    x = np.full(n, 1.0 / n)
    converged = False
    for _ in range(PAGERANK_MAX_ITER):
        spread = adjacency @ (x / safe_deg)
        dangling_mass = x[dangling].sum()
        x_new = (1.0 - damping) / n + damping * (spread + dangling_mass / n)
        if np.abs(x_new - x).sum() < tol:
            x = x_new
            converged = True
            break
        x = x_new
    values = x / ((1.0 - damping) / n) if normalized else x
    return NodeScores(measure, values, converged=converged)


def community_detect(
    rin: Rin,
    method: CommunityMethod = CommunityMethod.PLM,
    gamma: float = 1.0,
    seed: int = 0,
) -> Partition:
    """PLM (local moving + coarsening) or Leiden (adds refinement) communities.

    Fully deterministic: node scan order, tie-breaking, and coarsening order
    are fixed, so ``seed`` does not alter the result; it is accepted for
    interface stability.
    """
    del seed
    labels = _community.detect(
        rin.indptr, rin.indices, rin.node_count,
        gamma=gamma, refine=method is CommunityMethod.LEIDEN,
    )
    k = int(labels.max()) + 1 if len(labels) else 0
    return Partition(labels=labels, community_count=k)


def modularity(rin: Rin, p: Partition, gamma: float = 1.0) -> float:
    """Newman-Girvan modularity with resolution gamma; 0 for edgeless graphs."""
    if len(p) != rin.node_count:
        raise LengthMismatch(f"partition covers {len(p)} nodes, graph has {rin.node_count}")
    m = rin.n_edges
    if m == 0:
        return 0.0
    labels = p.labels
    intra = labels[rin.edges_i] == labels[rin.edges_j]
    e_c = np.bincount(labels[rin.edges_i][intra], minlength=p.community_count)
    deg_c = np.bincount(labels, weights=rin.degrees.astype(np.float64),
                        minlength=p.community_count)
    return float(np.sum(e_c / m - gamma * (deg_c / (2.0 * m)) ** 2))


def nmi(p: Partition, q: Partition) -> float:
    """Normalized mutual information, max-entropy normalization, in [0, 1].

    Defined as 1 when both partitions are the same single-community
    partition (both entropies zero).
    """
    if len(p) != len(q):
        raise LengthMismatch(f"partition lengths differ: {len(p)} vs {len(q)}")
    n = len(p)
    if n == 0:
        return 1.0
    counts = np.bincount(
        p.labels * q.community_count + q.labels,
        minlength=p.community_count * q.community_count,
    ).reshape(p.community_count, q.community_count)
    pa = counts.sum(axis=1) / n
    pb = counts.sum(axis=0) / n
    h_p = -np.sum(pa[pa > 0] * np.log(pa[pa > 0]))
    h_q = -np.sum(pb[pb > 0] * np.log(pb[pb > 0]))
    h_max = max(h_p, h_q)
    if h_max == 0.0:
        return 1.0
    joint = counts / n
    nz = joint > 0
    info = np.sum(joint[nz] * np.log(joint[nz] / np.outer(pa, pb)[nz]))
    return float(min(max(info / h_max, 0.0), 1.0))


def score_delta(current: NodeScores, buffer: NodeScores) -> NodeScores:
    """Signed element-wise difference current - buffer (same measure)."""
    if current.measure_id is not buffer.measure_id:
        raise MeasureMismatch(
            f"{current.measure_id.value} vs {buffer.measure_id.value}"
        )
    if len(current) != len(buffer):
        raise LengthMismatch(f"{len(current)} vs {len(buffer)}")
    return NodeScores(current.measure_id, current.values - buffer.values)
