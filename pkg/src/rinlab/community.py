"""Modularity community detection: parallel-Louvain-style local moving with
coarsening (PLM) and an optional Leiden-style refinement phase.

Deterministic by construction: nodes are scanned in ascending id, equal-gain
moves resolve to the smallest community id, coarsening numbers communities by
first occurrence in node order. The local-moving sweep is the hot loop and is
dispatched through the kernel backends.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels


def canonical_labels(raw: np.ndarray) -> np.ndarray:
    """Relabel to dense 0..k-1, numbered by first occurrence in node order."""
    raw = np.asarray(raw, dtype=np.int64)
    if len(raw) == 0:
        return raw
    uniq, first = np.unique(raw, return_index=True)
    order = np.argsort(first, kind="stable")
    mapping = np.empty(int(uniq.max()) + 1, dtype=np.int64)
    mapping[uniq[order]] = np.arange(len(uniq))
    return mapping[raw]


@dataclass(frozen=True, eq=False)
class _Level:
    """Weighted graph level: CSR without self-loops + per-node internal weight."""

    indptr: np.ndarray  # int64
    indices: np.ndarray  # int32
    weights: np.ndarray  # float64
    self_w: np.ndarray  # float64, internal (self-loop) weight per node
    strength: np.ndarray  # float64, Σ incident weight + 2·self_w
    total_w: float  # total undirected edge weight incl. self-loops

    @property
    def n(self) -> int:
        return len(self.indptr) - 1


def _level_from_csr(indptr, indices, n: int) -> _Level:
    weights = np.ones(len(indices), dtype=np.float64)
    self_w = np.zeros(n, dtype=np.float64)
    strength = np.diff(indptr).astype(np.float64)
    return _Level(
        np.asarray(indptr, dtype=np.int64),
        np.asarray(indices, dtype=np.int32),
        weights,
        self_w,
        strength,
        total_w=len(indices) / 2.0,
    )


def _coarsen(g: _Level, labels: np.ndarray) -> _Level:
    """Aggregate communities into nodes; labels must be dense 0..k-1."""
    k = int(labels.max()) + 1
    src = np.repeat(np.arange(g.n, dtype=np.int64), np.diff(g.indptr))
    csrc = labels[src]
    cdst = labels[g.indices]
    intra = csrc == cdst
    new_self = np.bincount(labels, weights=g.self_w, minlength=k)
    new_self += 0.5 * np.bincount(csrc[intra], weights=g.weights[intra], minlength=k)

    csrc, cdst, w = csrc[~intra], cdst[~intra], g.weights[~intra]
    if len(csrc):
        keys = csrc * k + cdst
        order = np.argsort(keys, kind="stable")
        keys, w = keys[order], w[order]
        starts = np.concatenate(([0], np.flatnonzero(np.diff(keys)) + 1))
        ukeys = keys[starts]
        wsum = np.add.reduceat(w, starts)
        nsrc = (ukeys // k).astype(np.int64)
        ndst = (ukeys % k).astype(np.int32)
        counts = np.bincount(nsrc, minlength=k)
        indptr = np.zeros(k + 1, dtype=np.int64)
        np.cumsum(counts, out=indptr[1:])
        indices, weights = ndst, wsum
    else:
        indptr = np.zeros(k + 1, dtype=np.int64)
        indices = np.empty(0, dtype=np.int32)
        weights = np.empty(0, dtype=np.float64)

    strength = np.zeros(k, dtype=np.float64)
    if len(weights):
        np.add.at(strength, nsrc, weights)
    strength += 2.0 * new_self
    return _Level(indptr, indices, weights, new_self, strength, total_w=g.total_w)


def _local_move_python(indptr, indices, weights, strength, labels, total_w, gamma):
    """Reference local-moving loop; the compiled kernel mirrors this exactly."""
    n = len(strength)
    m = total_w
    comm_strength = np.zeros(n, dtype=np.float64)
    for v in range(n):
        comm_strength[labels[v]] += strength[v]
    w_to = np.zeros(n, dtype=np.float64)
    improved = False
    moved = True
    while moved:
        moved = False
        for v in range(n):
            a = labels[v]
            s_v = strength[v]
            touched = []
            for e in range(indptr[v], indptr[v + 1]):
                c = labels[indices[e]]
                if w_to[c] == 0.0:
                    touched.append(c)
                w_to[c] += weights[e]
            k_va = w_to[a]
            s_a = comm_strength[a]
            best_gain = 0.0
            best_c = a
            touched.sort()
            for c in touched:
                if c != a:
                    gain = (w_to[c] - k_va) / m - gamma * s_v * (
                        comm_strength[c] - s_a + s_v
                    ) / (2.0 * m * m)
                    if gain > best_gain:
                        best_gain = gain
                        best_c = c
                w_to[c] = 0.0
            if best_c != a:
                labels[v] = best_c
                comm_strength[a] -= s_v
                comm_strength[best_c] += s_v
                moved = True
                improved = True
    return improved


def _local_move(g: _Level, gamma: float, init: np.ndarray):
    labels = np.asarray(init, dtype=np.int64).copy()
    kern = _kernels.get_backend()
    if hasattr(kern, "louvain_local_move"):
        improved = kern.louvain_local_move(
            g.indptr, g.indices, g.weights, g.strength, labels, g.total_w, gamma
        )
    else:
        improved = _local_move_python(
            g.indptr, g.indices, g.weights, g.strength, labels, g.total_w, gamma
        )
    return labels, bool(improved)


def _refine(g: _Level, labels: np.ndarray, gamma: float):
    """Leiden refinement: re-split each community by greedy singleton merging.

    Only singleton nodes merge, only into refined communities inside their
    local-moving community, and only on strictly positive modularity gain
    (ties to the smallest refined id). Returns dense refined labels plus the
    parent community of each refined community.
    """
    m = g.total_w
    ref = np.arange(g.n, dtype=np.int64)
    size = np.ones(g.n, dtype=np.int64)
    s_ref = g.strength.copy()
    indptr, indices, weights, strength = g.indptr, g.indices, g.weights, g.strength
    for v in range(g.n):
        if size[ref[v]] > 1:
            continue
        cand: dict[int, float] = {}
        for e in range(indptr[v], indptr[v + 1]):
            u = indices[e]
            if labels[u] != labels[v]:
                continue
            r = int(ref[u])
            if r == ref[v]:
                continue
            cand[r] = cand.get(r, 0.0) + weights[e]
        s_v = strength[v]
        best_gain = 0.0
        best_r = int(ref[v])
        for r in sorted(cand):
            gain = cand[r] / m - gamma * s_v * s_ref[r] / (2.0 * m * m)
            if gain > best_gain:
                best_gain = gain
                best_r = r
        if best_r != ref[v]:
            old = ref[v]
            ref[v] = best_r
            size[old] -= 1
            size[best_r] += 1
            s_ref[old] -= s_v
            s_ref[best_r] += s_v

    ref = canonical_labels(ref)
    k = int(ref.max()) + 1
    parent = np.empty(k, dtype=np.int64)
    parent[ref] = labels  # every member of a refined community shares a parent
    return ref, parent


def detect(indptr, indices, n: int, gamma: float = 1.0, refine: bool = False) -> np.ndarray:
    """Community labels for an unweighted CSR graph (dense, deterministic)."""
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    if n == 0:
        return np.empty(0, dtype=np.int64)
    g = _level_from_csr(indptr, indices, n)
    node_map = np.arange(n, dtype=np.int64)
    if g.total_w == 0:
        return node_map
    init = np.arange(n, dtype=np.int64)
    while True:
        labels, improved = _local_move(g, gamma, init)
        labels = canonical_labels(labels)
        k = int(labels.max()) + 1
        if not improved or k == g.n:
            node_map = labels[node_map]
            break
        if refine:
            sub, parent = _refine(g, labels, gamma)
        else:
            sub, parent = labels, np.arange(k, dtype=np.int64)
        node_map = sub[node_map]
        g = _coarsen(g, sub)
        init = parent
    return canonical_labels(node_map)
