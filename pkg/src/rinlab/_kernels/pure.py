"""Pure numpy/scipy kernel implementations.

Fallback backend used when the compiled extension is unavailable. Signatures
and results match ``_ckern``: pair searches are exact (candidate generation is
accelerated, the ≤ cutoff comparison is done on squared distances in double
precision), graph kernels are deterministic.
"""
from __future__ import annotations

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path
from scipy.spatial import cKDTree

_EMPTY_I4 = np.empty(0, dtype=np.int32)
_EMPTY_F8 = np.empty(0, dtype=np.float64)


def _query_pairs_exact(coords: np.ndarray, cutoff: float) -> tuple[np.ndarray, np.ndarray]:
    """All point pairs (i<j) with squared distance ≤ cutoff²."""
    if len(coords) < 2:
        return np.empty((0, 2), dtype=np.int64), _EMPTY_F8
    tree = cKDTree(coords)
    # query with a hair of slack, then filter exactly on squared distance
    pairs = tree.query_pairs(cutoff * (1.0 + 1e-12), output_type="ndarray")
    if pairs.size == 0:
        return pairs.reshape(0, 2), _EMPTY_F8
    d2 = np.einsum("ij,ij->i", coords[pairs[:, 0]] - coords[pairs[:, 1]],
                   coords[pairs[:, 0]] - coords[pairs[:, 1]])
    keep = d2 <= cutoff * cutoff
    return pairs[keep], d2[keep]


def atom_pair_hits(coords: np.ndarray, atom_res: np.ndarray, cutoff: float):
    """Residue-pair hits from atom pairs within cutoff.

    Returns (ri, rj, d2) with ri < rj; one entry per contributing atom pair
    (duplicates are reduced by the caller), same-residue pairs dropped.
    """
    pairs, d2 = _query_pairs_exact(coords, cutoff)
    if pairs.size == 0:
        return _EMPTY_I4, _EMPTY_I4, _EMPTY_F8
    ri = atom_res[pairs[:, 0]].astype(np.int32, copy=False)
    rj = atom_res[pairs[:, 1]].astype(np.int32, copy=False)
    mask = ri != rj
    ri, rj, d2 = ri[mask], rj[mask], d2[mask]
    lo = np.minimum(ri, rj)
    hi = np.maximum(ri, rj)
    return lo, hi, d2


def point_pairs(points: np.ndarray, cutoff: float):
    """Unique point pairs (i<j) with squared distance ≤ cutoff²."""
    pairs, d2 = _query_pairs_exact(points, cutoff)
    if pairs.size == 0:
        return _EMPTY_I4, _EMPTY_I4, _EMPTY_F8
    return (pairs[:, 0].astype(np.int32), pairs[:, 1].astype(np.int32), d2)


def _adjacency(indptr: np.ndarray, indices: np.ndarray, n: int) -> csr_matrix:
    data = np.ones(len(indices), dtype=np.float64)
    return csr_matrix((data, indices.astype(np.int64), indptr), shape=(n, n))


def betweenness(indptr: np.ndarray, indices: np.ndarray, n: int) -> np.ndarray:
    """Exact betweenness (unordered pairs, endpoints excluded, unnormalized).

    Level-synchronous algebraic formulation of the Brandes accumulation,
    chunked over sources to bound memory at O(chunk * n).
    """
    bc = np.zeros(n, dtype=np.float64)
    if n < 3 or len(indices) == 0:
        return bc
    A = _adjacency(indptr, indices, n)
    chunk = max(1, min(n, 4_000_000 // max(n, 1)))
    for start in range(0, n, chunk):
        sources = np.arange(start, min(start + chunk, n))
        D = shortest_path(A, method="auto", directed=True, unweighted=True,
                          indices=sources)
        finite = np.isfinite(D)
        if not finite.any():
            continue
        max_lev = int(D[finite].max())
        b = len(sources)
        sigma = np.zeros((b, n), dtype=np.float64)
        sigma[np.arange(b), sources] = 1.0
        for lev in range(1, max_lev + 1):
            contrib = (sigma * (D == lev - 1)) @ A
            sigma += np.where(D == lev, contrib, 0.0)
        delta = np.zeros((b, n), dtype=np.float64)
        for lev in range(max_lev, 0, -1):
            mask = D == lev
            coef = np.divide(1.0 + delta, sigma, out=np.zeros_like(delta),
                             where=mask & (sigma > 0))
            spread = coef @ A
            delta += np.where(D == lev - 1, sigma * spread, 0.0)
        bc += delta.sum(axis=0)
        bc[sources] -= delta[np.arange(b), sources]
    return bc / 2.0


def closeness_sums(indptr: np.ndarray, indices: np.ndarray, n: int):
    """Per-node (Σ 1/d, Σ d, reach count) over finite-distance targets u ≠ v."""
    harm = np.zeros(n, dtype=np.float64)
    dsum = np.zeros(n, dtype=np.float64)
    reach = np.zeros(n, dtype=np.int32)
    if n == 0 or len(indices) == 0:
        return harm, dsum, reach
    A = _adjacency(indptr, indices, n)
    chunk = max(1, min(n, 8_000_000 // max(n, 1)))
    for start in range(0, n, chunk):
        sources = np.arange(start, min(start + chunk, n))
        D = shortest_path(A, method="auto", directed=True, unweighted=True,
                          indices=sources)
        D[np.arange(len(sources)), sources] = np.inf  # exclude self
        finite = np.isfinite(D)
        harm[sources] = np.where(finite, 1.0 / D, 0.0).sum(axis=1)
        dsum[sources] = np.where(finite, D, 0.0).sum(axis=1)
        reach[sources] = finite.sum(axis=1)
    return harm, dsum, reach


def _edge_terms(pos: np.ndarray, indptr: np.ndarray, indices: np.ndarray,
                target_d: float, eps: float):
    """Attraction sums and edge repulsion sums per node, from CSR (both directions)."""
    n = pos.shape[0]
    deg = np.diff(indptr).astype(np.float64)
    att = np.zeros_like(pos)
    rep_edge = np.zeros_like(pos)
    if len(indices):
        src = np.repeat(np.arange(n), np.diff(indptr))
        dst = indices
        vec = pos[src] - pos[dst]
        d2 = np.maximum(np.einsum("ij,ij->i", vec, vec), eps * eps)
        d = np.sqrt(d2)
        np.add.at(att, src, pos[dst] + target_d * vec / d[:, None])
        np.add.at(rep_edge, src, vec / d2[:, None])
    return deg, att, rep_edge


def _apply_round(pos, deg, att, rep, target_d, alpha):
    new = np.empty_like(pos)
    conn = deg > 0
    if conn.any():
        new[conn] = (att[conn] + alpha * target_d * target_d * rep[conn]) / deg[conn, None]
    iso = ~conn
    if iso.any():
        # no stress term: take a plain gradient step on the entropy term
        new[iso] = pos[iso] + alpha * rep[iso]
    return new


def maxent_round(pos: np.ndarray, indptr: np.ndarray, indices: np.ndarray,
                 target_d: float, alpha: float, comp: np.ndarray,
                 eps: float = 1e-9) -> np.ndarray:
    """One Jacobi majorization round with the exact entropy term.

    Repulsion acts between non-edge pairs within the same connected component
    (``comp`` labels); cross-component pairs have no stationary arrangement
    under the log term and are handled by the caller's packing step.
    """
    n = pos.shape[0]
    deg, att, rep_edge = _edge_terms(pos, indptr, indices, target_d, eps)
    rep = np.zeros_like(pos)
    if alpha != 0.0 and n > 1:
        chunk = max(1, 2_000_000 // max(n, 1))
        for start in range(0, n, chunk):
            block = slice(start, min(start + chunk, n))
            diff = pos[block, None, :] - pos[None, :, :]
            dist2 = np.einsum("ijk,ijk->ij", diff, diff)
            dist2 = np.maximum(dist2, eps * eps)
            rows = np.arange(block.start, block.stop)
            dist2[rows - block.start, rows] = np.inf  # drop self pairs
            dist2[comp[block, None] != comp[None, :]] = np.inf
            rep[block] = (diff / dist2[:, :, None]).sum(axis=1)
        rep -= rep_edge
    return _apply_round(pos, deg, att, rep, target_d, alpha)


def maxent_round_pairs(pos: np.ndarray, indptr: np.ndarray, indices: np.ndarray,
                       target_d: float, alpha: float, rep_i: np.ndarray,
                       rep_j: np.ndarray, eps: float = 1e-9) -> np.ndarray:
    """One majorization round with repulsion over an explicit non-edge pair list."""
    deg, att, _ = _edge_terms(pos, indptr, indices, target_d, eps)
    rep = np.zeros_like(pos)
    if alpha != 0.0 and len(rep_i):
        vec = pos[rep_i] - pos[rep_j]
        d2 = np.maximum(np.einsum("ij,ij->i", vec, vec), eps * eps)
        contrib = vec / d2[:, None]
        np.add.at(rep, rep_i, contrib)
        np.add.at(rep, rep_j, -contrib)
    return _apply_round(pos, deg, att, rep, target_d, alpha)
