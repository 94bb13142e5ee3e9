# distutils: language = c++
# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: uniform-grid pair search, BFS analytics, layout rounds.

Layout rounds and the local-moving sweep are single-threaded so their results
are independent of thread count. The per-source BFS kernels parallelize over
sources with statically chunked threads and reduce partial sums in thread-id
order (bit-deterministic for a fixed thread count). Pair searches compare
squared distances in double precision, matching the pure backend and the
all-pairs oracle exactly.
"""
from cython.parallel cimport prange, threadid
from libc.math cimport floor, sqrt
from libcpp.algorithm cimport sort as cpp_sort
from libcpp.vector cimport vector

import os

import numpy as np
cimport numpy as cnp

cnp.import_array()

_MAX_THREADS = max(1, min(os.cpu_count() or 1, 16))


def _source_threads(n: int) -> int:
    """Threads for per-source BFS kernels; small graphs stay serial."""
    return _MAX_THREADS if n >= 256 else 1


cdef struct GridDims:
    double minx, miny, minz
    long long ncx, ncy, ncz


cdef GridDims _grid_dims(double[:, ::1] coords, double cell) noexcept:
    cdef GridDims g
    cdef Py_ssize_t i, n = coords.shape[0]
    g.minx = coords[0, 0]; g.miny = coords[0, 1]; g.minz = coords[0, 2]
    cdef double maxx = g.minx, maxy = g.miny, maxz = g.minz
    for i in range(1, n):
        if coords[i, 0] < g.minx: g.minx = coords[i, 0]
        if coords[i, 1] < g.miny: g.miny = coords[i, 1]
        if coords[i, 2] < g.minz: g.minz = coords[i, 2]
        if coords[i, 0] > maxx: maxx = coords[i, 0]
        if coords[i, 1] > maxy: maxy = coords[i, 1]
        if coords[i, 2] > maxz: maxz = coords[i, 2]
    g.ncx = <long long>floor((maxx - g.minx) / cell) + 1
    g.ncy = <long long>floor((maxy - g.miny) / cell) + 1
    g.ncz = <long long>floor((maxz - g.minz) / cell) + 1
    return g


cdef inline long long _cell_of(GridDims g, double cell, double x, double y, double z) noexcept:
    cdef long long cx = <long long>floor((x - g.minx) / cell)
    cdef long long cy = <long long>floor((y - g.miny) / cell)
    cdef long long cz = <long long>floor((z - g.minz) / cell)
    if cx >= g.ncx: cx = g.ncx - 1
    if cy >= g.ncy: cy = g.ncy - 1
    if cz >= g.ncz: cz = g.ncz - 1
    return (cx * g.ncy + cy) * g.ncz + cz


def _pair_search(double[:, ::1] coords, double cutoff):
    """Atom-index pairs (a < b) with squared distance ≤ cutoff², via cell lists."""
    cdef Py_ssize_t n = coords.shape[0]
    cdef vector[int] out_a, out_b
    cdef vector[double] out_d2
    if n < 2:
        return (np.empty(0, np.int32), np.empty(0, np.int32), np.empty(0, np.float64))

    cdef GridDims g = _grid_dims(coords, cutoff)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] cell_ids_arr = np.empty(n, dtype=np.int64)
    cdef long long[:] cell_ids = cell_ids_arr
    cdef Py_ssize_t i
    for i in range(n):
        cell_ids[i] = _cell_of(g, cutoff, coords[i, 0], coords[i, 1], coords[i, 2])

    cdef cnp.ndarray[cnp.int64_t, ndim=1] order_arr = np.argsort(cell_ids_arr, kind="stable")
    cdef long long[:] order = order_arr
    cdef cnp.ndarray[cnp.int64_t, ndim=1] sorted_cells_arr = cell_ids_arr[order_arr]
    cdef long long[:] sorted_cells = sorted_cells_arr

    # unique cells with start offsets into the sorted atom order
    cdef vector[long long] ucell
    cdef vector[Py_ssize_t] ustart
    cdef long long prev = -1
    for i in range(n):
        if sorted_cells[i] != prev:
            ucell.push_back(sorted_cells[i])
            ustart.push_back(i)
            prev = sorted_cells[i]
    ustart.push_back(n)
    cdef Py_ssize_t n_cells = ucell.size()

    cdef double c2 = cutoff * cutoff
    cdef Py_ssize_t ci, lo, hi, p, q, qlo, qhi
    cdef long long cid, nid
    cdef long long cx, cy, cz, rem, dx, dy, dz
    cdef int a, b, tmp
    cdef double ddx, ddy, ddz, d2
    cdef Py_ssize_t left, right, mid

    for ci in range(n_cells):
        cid = ucell[ci]
        lo = ustart[ci]; hi = ustart[ci + 1]
        cz = cid % g.ncz
        rem = cid / g.ncz
        cy = rem % g.ncy
        cx = rem / g.ncy
        for dx in range(-1, 2):
            if cx + dx < 0 or cx + dx >= g.ncx: continue
            for dy in range(-1, 2):
                if cy + dy < 0 or cy + dy >= g.ncy: continue
                for dz in range(-1, 2):
                    if cz + dz < 0 or cz + dz >= g.ncz: continue
                    nid = ((cx + dx) * g.ncy + (cy + dy)) * g.ncz + (cz + dz)
                    if nid < cid:
                        continue
                    if nid == cid:
                        for p in range(lo, hi):
                            a = <int>order[p]
                            for q in range(p + 1, hi):
                                b = <int>order[q]
                                ddx = coords[a, 0] - coords[b, 0]
                                ddy = coords[a, 1] - coords[b, 1]
                                ddz = coords[a, 2] - coords[b, 2]
                                d2 = ddx * ddx + ddy * ddy + ddz * ddz
                                if d2 <= c2:
                                    if a < b:
                                        out_a.push_back(a); out_b.push_back(b)
                                    else:
                                        out_a.push_back(b); out_b.push_back(a)
                                    out_d2.push_back(d2)
                        continue
                    # binary search for nid in the unique cell table
                    left = 0; right = n_cells
                    while left < right:
                        mid = (left + right) // 2
                        if ucell[mid] < nid: left = mid + 1
                        else: right = mid
                    if left == n_cells or ucell[left] != nid:
                        continue
                    qlo = ustart[left]; qhi = ustart[left + 1]
                    for p in range(lo, hi):
                        a = <int>order[p]
                        for q in range(qlo, qhi):
                            b = <int>order[q]
                            ddx = coords[a, 0] - coords[b, 0]
                            ddy = coords[a, 1] - coords[b, 1]
                            ddz = coords[a, 2] - coords[b, 2]
                            d2 = ddx * ddx + ddy * ddy + ddz * ddz
                            if d2 <= c2:
                                if a < b:
                                    out_a.push_back(a); out_b.push_back(b)
                                else:
                                    out_a.push_back(b); out_b.push_back(a)
                                out_d2.push_back(d2)

    cdef Py_ssize_t k = out_a.size()
    cdef cnp.ndarray[cnp.int32_t, ndim=1] ra = np.empty(k, dtype=np.int32)
    cdef cnp.ndarray[cnp.int32_t, ndim=1] rb = np.empty(k, dtype=np.int32)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] rd = np.empty(k, dtype=np.float64)
    for i in range(k):
        ra[i] = out_a[i]; rb[i] = out_b[i]; rd[i] = out_d2[i]
    return ra, rb, rd


def atom_pair_hits(coords, atom_res, double cutoff):
    """Residue-pair hits (ri < rj, same-residue dropped) from atom pairs within cutoff."""
    a, b, d2 = _pair_search(np.ascontiguousarray(coords, dtype=np.float64), cutoff)
    if len(a) == 0:
        return a, b, d2
    res = np.asarray(atom_res, dtype=np.int32)
    ri = res[a]
    rj = res[b]
    mask = ri != rj
    ri, rj, d2 = ri[mask], rj[mask], d2[mask]
    lo = np.minimum(ri, rj)
    hi = np.maximum(ri, rj)
    return lo, hi, d2


def point_pairs(points, double cutoff):
    """Unique point pairs (i<j) with squared distance ≤ cutoff²."""
    return _pair_search(np.ascontiguousarray(points, dtype=np.float64), cutoff)


cdef void _brandes_source(int s, long long* ptr, int* adj, int n,
                          int* dist, int* order, double* sigma, double* delta,
                          double* bc_part) noexcept nogil:
    cdef int v, w, head, tail, dw
    cdef long long e
    cdef double coeff, sw
    cdef Py_ssize_t idx
    for v in range(n):
        dist[v] = -1
        sigma[v] = 0.0
        delta[v] = 0.0
    dist[s] = 0
    sigma[s] = 1.0
    order[0] = s
    head = 0; tail = 1
    while head < tail:
        v = order[head]; head += 1
        dw = dist[v] + 1
        sw = sigma[v]
        for e in range(ptr[v], ptr[v + 1]):
            w = adj[e]
            if dist[w] < 0:
                dist[w] = dw
                order[tail] = w; tail += 1
                sigma[w] += sw
            elif dist[w] == dw:
                sigma[w] += sw
    for idx in range(tail - 1, 0, -1):
        w = order[idx]
        coeff = (1.0 + delta[w]) / sigma[w]
        dw = dist[w] - 1
        for e in range(ptr[w], ptr[w + 1]):
            v = adj[e]
            if dist[v] == dw:
                delta[v] += sigma[v] * coeff
        bc_part[w] += delta[w]


def betweenness(indptr, indices, int n):
    """Brandes betweenness: unordered pairs, endpoints excluded, unnormalized.

    Sources are processed in parallel with per-thread scratch; per-thread
    partial sums are reduced in thread-id order.
    """
    cdef cnp.ndarray[cnp.float64_t, ndim=1] bc = np.zeros(n, dtype=np.float64)
    if n < 3 or len(indices) == 0:
        return bc
    cdef long long[::1] ptr = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef int[::1] adj = np.ascontiguousarray(indices, dtype=np.int32)
    cdef int T = _source_threads(n)
    cdef cnp.ndarray[cnp.int32_t, ndim=2] dist = np.empty((T, n), dtype=np.int32)
    cdef cnp.ndarray[cnp.int32_t, ndim=2] order = np.empty((T, n), dtype=np.int32)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] sigma = np.empty((T, n), dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] delta = np.empty((T, n), dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] bc_part = np.zeros((T, n), dtype=np.float64)
    cdef int[:, ::1] dist_v = dist
    cdef int[:, ::1] order_v = order
    cdef double[:, ::1] sigma_v = sigma
    cdef double[:, ::1] delta_v = delta
    cdef double[:, ::1] part_v = bc_part
    cdef int s, tid

    if T == 1:
        for s in range(n):
            _brandes_source(s, &ptr[0], &adj[0], n, &dist_v[0, 0], &order_v[0, 0],
                            &sigma_v[0, 0], &delta_v[0, 0], &part_v[0, 0])
    else:
        for s in prange(n, nogil=True, schedule="static", num_threads=T):
            tid = threadid()
            _brandes_source(s, &ptr[0], &adj[0], n, &dist_v[tid, 0],
                            &order_v[tid, 0], &sigma_v[tid, 0], &delta_v[tid, 0],
                            &part_v[tid, 0])
    for tid in range(T):  # ordered reduction keeps results reproducible
        bc += bc_part[tid]
    return bc / 2.0


def louvain_local_move(indptr, indices, weights, strength, labels, double total_w,
                       double gamma):
    """Repeated local-moving sweeps until stable; mutates ``labels`` in place.

    Mirrors the pure-Python reference loop operation for operation so both
    backends produce identical partitions.
    """
    cdef long long[:] ptr = np.asarray(indptr, dtype=np.int64)
    cdef int[:] adj = np.asarray(indices, dtype=np.int32)
    cdef double[:] w = np.asarray(weights, dtype=np.float64)
    cdef double[:] s = np.asarray(strength, dtype=np.float64)
    cdef long long[:] lab = labels
    cdef Py_ssize_t n = s.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] cs_arr = np.zeros(n, dtype=np.float64)
    cdef double[:] cs = cs_arr
    cdef cnp.ndarray[cnp.float64_t, ndim=1] wto_arr = np.zeros(n, dtype=np.float64)
    cdef double[:] w_to = wto_arr
    cdef vector[long long] touched
    cdef Py_ssize_t v, t
    cdef long long a, c, best_c
    cdef long long e
    cdef double m = total_w
    cdef double s_v, k_va, s_a, best_gain, gain
    cdef bint improved = False, moved = True

    for v in range(n):
        cs[lab[v]] += s[v]
    while moved:
        moved = False
        for v in range(n):
            a = lab[v]
            s_v = s[v]
            touched.clear()
            for e in range(ptr[v], ptr[v + 1]):
                c = lab[adj[e]]
                if w_to[c] == 0.0:
                    touched.push_back(c)
                w_to[c] += w[e]
            k_va = w_to[a]
            s_a = cs[a]
            best_gain = 0.0
            best_c = a
            cpp_sort(touched.begin(), touched.end())
            for t in range(<Py_ssize_t>touched.size()):
                c = touched[t]
                if c != a:
                    gain = (w_to[c] - k_va) / m - gamma * s_v * (
                        cs[c] - s_a + s_v
                    ) / (2.0 * m * m)
                    if gain > best_gain:
                        best_gain = gain
                        best_c = c
                w_to[c] = 0.0
            if best_c != a:
                lab[v] = best_c
                cs[a] -= s_v
                cs[best_c] += s_v
                moved = True
                improved = True
    return improved


cdef void _bfs_sums(int s, long long* ptr, int* adj, int n, int* dist, int* queue,
                    double* harm, double* dsum, int* reach) noexcept nogil:
    cdef int v, w, head, tail, cnt
    cdef long long e
    cdef double hs, ds
    for v in range(n):
        dist[v] = -1
    dist[s] = 0
    queue[0] = s
    head = 0; tail = 1
    hs = 0.0; ds = 0.0; cnt = 0
    while head < tail:
        v = queue[head]; head += 1
        if v != s:
            hs += 1.0 / dist[v]
            ds += dist[v]
            cnt += 1
        for e in range(ptr[v], ptr[v + 1]):
            w = adj[e]
            if dist[w] < 0:
                dist[w] = dist[v] + 1
                queue[tail] = w; tail += 1
    harm[s] = hs
    dsum[s] = ds
    reach[s] = cnt


def closeness_sums(indptr, indices, int n):
    """Per-node (Σ 1/d, Σ d, reach count) over finite-distance targets u ≠ v.

    Per-source outputs are disjoint, so the parallel loop is deterministic
    regardless of thread count.
    """
    cdef cnp.ndarray[cnp.float64_t, ndim=1] harm = np.zeros(n, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] dsum = np.zeros(n, dtype=np.float64)
    cdef cnp.ndarray[cnp.int32_t, ndim=1] reach = np.zeros(n, dtype=np.int32)
    if n == 0 or len(indices) == 0:
        return harm, dsum, reach
    cdef long long[::1] ptr = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef int[::1] adj = np.ascontiguousarray(indices, dtype=np.int32)
    cdef int T = _source_threads(n)
    cdef cnp.ndarray[cnp.int32_t, ndim=2] dist = np.empty((T, n), dtype=np.int32)
    cdef cnp.ndarray[cnp.int32_t, ndim=2] queue = np.empty((T, n), dtype=np.int32)
    cdef int[:, ::1] dist_v = dist
    cdef int[:, ::1] queue_v = queue
    cdef double[:] harm_v = harm
    cdef double[:] dsum_v = dsum
    cdef int[:] reach_v = reach
    cdef int s, tid

    if T == 1:
        for s in range(n):
            _bfs_sums(s, &ptr[0], &adj[0], n, &dist_v[0, 0], &queue_v[0, 0],
                      &harm_v[0], &dsum_v[0], &reach_v[0])
    else:
        for s in prange(n, nogil=True, schedule="static", num_threads=T):
            tid = threadid()
            _bfs_sums(s, &ptr[0], &adj[0], n, &dist_v[tid, 0], &queue_v[tid, 0],
                      &harm_v[0], &dsum_v[0], &reach_v[0])
    return harm, dsum, reach


cdef void _edge_and_finish(double[:, ::1] pos, long long[:] ptr, int[:] adj,
                           double target_d, double alpha, double eps,
                           double[:, ::1] rep, double[:, ::1] out) noexcept:
    """Add edge attraction, subtract edge repulsion, apply the update rule.

    ``rep`` on entry holds the raw repulsion sums over the configured pair set
    INCLUDING any edge pairs (exact mode passes all-pairs sums); edge terms are
    removed here so both modes share the finish step.
    """
    cdef Py_ssize_t n = pos.shape[0]
    cdef int i, j
    cdef long long e
    cdef double dx, dy, dz, d2, d, inv, ax, ay, az, deg, scale
    cdef double e2 = eps * eps
    for i in range(n):
        deg = <double>(ptr[i + 1] - ptr[i])
        if deg == 0.0:
            out[i, 0] = pos[i, 0] + alpha * rep[i, 0]
            out[i, 1] = pos[i, 1] + alpha * rep[i, 1]
            out[i, 2] = pos[i, 2] + alpha * rep[i, 2]
            continue
        ax = 0.0; ay = 0.0; az = 0.0
        for e in range(ptr[i], ptr[i + 1]):
            j = adj[e]
            dx = pos[i, 0] - pos[j, 0]
            dy = pos[i, 1] - pos[j, 1]
            dz = pos[i, 2] - pos[j, 2]
            d2 = dx * dx + dy * dy + dz * dz
            if d2 < e2: d2 = e2
            d = sqrt(d2)
            inv = target_d / d
            ax += pos[j, 0] + dx * inv
            ay += pos[j, 1] + dy * inv
            az += pos[j, 2] + dz * inv
            if alpha != 0.0:
                inv = 1.0 / d2
                rep[i, 0] -= dx * inv
                rep[i, 1] -= dy * inv
                rep[i, 2] -= dz * inv
        scale = alpha * target_d * target_d
        out[i, 0] = (ax + scale * rep[i, 0]) / deg
        out[i, 1] = (ay + scale * rep[i, 1]) / deg
        out[i, 2] = (az + scale * rep[i, 2]) / deg


def maxent_round(pos, indptr, indices, double target_d, double alpha, comp,
                 double eps=1e-9):
    """One Jacobi majorization round with the exact entropy term.

    Repulsion acts between non-edge pairs within the same connected component
    (``comp`` labels); cross-component pairs have no stationary arrangement
    under the log term and are handled by the caller's packing step.
    """
    cdef double[:, ::1] p = np.ascontiguousarray(pos, dtype=np.float64)
    cdef Py_ssize_t n = p.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] rep_arr = np.zeros((n, 3), dtype=np.float64)
    cdef double[:, ::1] rep = rep_arr
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out_arr = np.empty((n, 3), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef long long[:] ptr = np.asarray(indptr, dtype=np.int64)
    cdef int[:] adj = np.asarray(indices, dtype=np.int32)
    cdef int[:] cmp = np.asarray(comp, dtype=np.int32)
    cdef Py_ssize_t i, j
    cdef double dx, dy, dz, d2, inv, e2 = eps * eps

    if alpha != 0.0:
        for i in range(n):
            for j in range(i + 1, n):
                if cmp[i] != cmp[j]:
                    continue
                dx = p[i, 0] - p[j, 0]
                dy = p[i, 1] - p[j, 1]
                dz = p[i, 2] - p[j, 2]
                d2 = dx * dx + dy * dy + dz * dz
                if d2 < e2: d2 = e2
                inv = 1.0 / d2
                rep[i, 0] += dx * inv; rep[i, 1] += dy * inv; rep[i, 2] += dz * inv
                rep[j, 0] -= dx * inv; rep[j, 1] -= dy * inv; rep[j, 2] -= dz * inv
    _edge_and_finish(p, ptr, adj, target_d, alpha, eps, rep, out)
    return out_arr


def maxent_round_pairs(pos, indptr, indices, double target_d, double alpha,
                       rep_i, rep_j, double eps=1e-9):
    """One majorization round with repulsion over an explicit non-edge pair list."""
    cdef double[:, ::1] p = np.ascontiguousarray(pos, dtype=np.float64)
    cdef Py_ssize_t n = p.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] rep_arr = np.zeros((n, 3), dtype=np.float64)
    cdef double[:, ::1] rep = rep_arr
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out_arr = np.empty((n, 3), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef long long[:] ptr = np.asarray(indptr, dtype=np.int64)
    cdef int[:] adj = np.asarray(indices, dtype=np.int32)
    cdef int[:] ri = np.asarray(rep_i, dtype=np.int32)
    cdef int[:] rj = np.asarray(rep_j, dtype=np.int32)
    cdef Py_ssize_t k, m = ri.shape[0]
    cdef int i, j
    cdef double dx, dy, dz, d2, inv, e2 = eps * eps

    if alpha != 0.0:
        for k in range(m):
            i = ri[k]; j = rj[k]
            dx = p[i, 0] - p[j, 0]
            dy = p[i, 1] - p[j, 1]
            dz = p[i, 2] - p[j, 2]
            d2 = dx * dx + dy * dy + dz * dz
            if d2 < e2: d2 = e2
            inv = 1.0 / d2
            rep[i, 0] += dx * inv; rep[i, 1] += dy * inv; rep[i, 2] += dz * inv
            rep[j, 0] -= dx * inv; rep[j, 1] -= dy * inv; rep[j, 2] -= dz * inv
        # the pair list excludes edges; pre-add the edge terms so the
        # subtraction inside _edge_and_finish cancels them exactly
        for i in range(n):
            for k in range(ptr[i], ptr[i + 1]):
                j = adj[k]
                dx = p[i, 0] - p[j, 0]
                dy = p[i, 1] - p[j, 1]
                dz = p[i, 2] - p[j, 2]
                d2 = dx * dx + dy * dy + dz * dz
                if d2 < e2: d2 = e2
                inv = 1.0 / d2
                rep[i, 0] += dx * inv
                rep[i, 1] += dy * inv
                rep[i, 2] += dz * inv
    _edge_and_finish(p, ptr, adj, target_d, alpha, eps, rep, out)
    return out_arr
