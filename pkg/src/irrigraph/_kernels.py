"""Jitted kernels for the hot paths: bucket-grid candidate scans, per-vertex
without-replacement choice sampling, ball/cube point counts, and union-find
over edge arrays.

Everything here is deterministic. The per-vertex RNG is splitmix64 seeded by
mixing (seed, vertex_id), so choice lists do not depend on iteration order.
"""

from __future__ import annotations

import numpy as np
from numba import njit

U64 = np.uint64
GOLDEN = U64(0x9E3779B97F4A7C15)
MIX1 = U64(0xBF58476D1CE4E5B9)
MIX2 = U64(0x94D049BB133111EB)
S30 = U64(30)
S27 = U64(27)
S31 = U64(31)
S11 = U64(11)
INV53 = 1.0 / 9007199254740992.0  # 2**-53


@njit(cache=True)
def _mix64(z):
    z = (z ^ (z >> S30)) * MIX1
    z = (z ^ (z >> S27)) * MIX2
    return z ^ (z >> S31)


@njit(cache=True)
def _vertex_state(seed_u, v):
    return _mix64(seed_u ^ _mix64(U64(v + 1) * GOLDEN))


@njit(cache=True)
def _dist2(pts, j, center, d):
    s = 0.0
    for k in range(d):
        dx = abs(pts[j, k] - center[k])
        if dx > 0.5:
            dx = 1.0 - dx
        s += dx * dx
    return s


@njit(cache=True)
def _gather_candidates(pts, member_ids, bucket_starts, b, d, center, work):
    """Copy into `work` the ids of all points in the 3^d wrapped buckets
    around `center` (deduplicated when b <= 2). Returns the count."""
    vals = np.empty((d, 3), np.int64)
    cnts = np.empty(d, np.int64)
    for k in range(d):
        q = np.int64(center[k] * b)
        if q >= b:
            q = b - 1
        c0 = 0
        for step in range(-1, 2):
            w = (q + step) % b
            dup = False
            for t in range(c0):
                if vals[k, t] == w:
                    dup = True
                    break
            if not dup:
                vals[k, c0] = w
                c0 += 1
        cnts[k] = c0
    idx = np.zeros(d, np.int64)
    nv = 0
    while True:
        flat = np.int64(0)
        for k in range(d):
            flat = flat * b + vals[k, idx[k]]
        for p in range(bucket_starts[flat], bucket_starts[flat + 1]):
            work[nv] = member_ids[p]
            nv += 1
        k = d - 1
        while k >= 0:
            idx[k] += 1
            if idx[k] < cnts[k]:
                break
            idx[k] = 0
            k -= 1
        if k < 0:
            break
    return nv


@njit(cache=True)
def degrees_kernel(pts, member_ids, bucket_starts, b, r, ws_size):
    n, d = pts.shape
    r2 = r * r
    work = np.empty(ws_size, np.int64)
    deg = np.zeros(n, np.int64)
    for i in range(n):
        ncand = _gather_candidates(pts, member_ids, bucket_starts, b, d, pts[i], work)
        cnt = 0
        for t in range(ncand):
            j = work[t]
            if j != i and _dist2(pts, j, pts[i], d) <= r2:
                cnt += 1
        deg[i] = cnt
    return deg


@njit(cache=True)
def sample_choices_kernel(pts, member_ids, bucket_starts, b, r, c, seed_u, ws_size):
    """For every vertex, an ordered uniform without-replacement sample of
    min(c, degree) neighbors, via partial Fisher-Yates on the neighbor list.

    Returns (flat int32 array of shape n*c padded with -1, per-vertex counts).
    """
    n, d = pts.shape
    r2 = r * r
    out = np.full(n * c, -1, np.int32)
    counts = np.zeros(n, np.int32)
    work = np.empty(ws_size, np.int64)
    nbrs = np.empty(ws_size, np.int64)
    for i in range(n):
        ncand = _gather_candidates(pts, member_ids, bucket_starts, b, d, pts[i], work)
        deg = 0
        for t in range(ncand):
            j = work[t]
            if j != i and _dist2(pts, j, pts[i], d) <= r2:
                nbrs[deg] = j
                deg += 1
        k = c if c < deg else deg
        state = _vertex_state(seed_u, i)
        base = i * c
        for t in range(k):
            state = state + GOLDEN
            u = (_mix64(state) >> S11) * INV53
            jj = t + np.int64(u * (deg - t))
            tmp = nbrs[t]
            nbrs[t] = nbrs[jj]
            nbrs[jj] = tmp
            out[base + t] = np.int32(nbrs[t])
        counts[i] = k
    return out, counts


@njit(cache=True)
def fy_sample_kernel(nbrs_in, c, seed_u, vid):
    """Sampling path for a single vertex given its neighbor list; must stay
    in lockstep with sample_choices_kernel (shared stream derivation)."""
    deg = nbrs_in.shape[0]
    nbrs = nbrs_in.copy()
    k = c if c < deg else deg
    out = np.empty(k, np.int32)
    state = _vertex_state(seed_u, vid)
    for t in range(k):
        state = state + GOLDEN
        u = (_mix64(state) >> S11) * INV53
        jj = t + np.int64(u * (deg - t))
        tmp = nbrs[t]
        nbrs[t] = nbrs[jj]
        nbrs[jj] = tmp
        out[t] = np.int32(nbrs[t])
    return out


@njit(cache=True)
def count_in_balls_kernel(pts, member_ids, bucket_starts, b, centers, r, strict, ws_size):
    nc = centers.shape[0]
    d = pts.shape[1]
    r2 = r * r
    work = np.empty(ws_size, np.int64)
    counts = np.zeros(nc, np.int64)
    for q in range(nc):
        ncand = _gather_candidates(pts, member_ids, bucket_starts, b, d, centers[q], work)
        cnt = 0
        for t in range(ncand):
            d2 = _dist2(pts, work[t], centers[q], d)
            if (d2 < r2) if strict else (d2 <= r2):
                cnt += 1
        counts[q] = cnt
    return counts


@njit(cache=True)
def count_in_cubes_kernel(pts, member_ids, bucket_starts, b, centers, half, ws_size):
    """Points whose per-coordinate wrapped offset from the center is <= half
    (cube of side 2*half). Requires half <= bucket side."""
    nc = centers.shape[0]
    d = pts.shape[1]
    work = np.empty(ws_size, np.int64)
    counts = np.zeros(nc, np.int64)
    for q in range(nc):
        ncand = _gather_candidates(pts, member_ids, bucket_starts, b, d, centers[q], work)
        cnt = 0
        for t in range(ncand):
            j = work[t]
            inside = True
            for k in range(d):
                dx = abs(pts[j, k] - centers[q, k])
                if dx > 0.5:
                    dx = 1.0 - dx
                if dx > half:
                    inside = False
                    break
            if inside:
                cnt += 1
        counts[q] = cnt
    return counts


@njit(cache=True)
def _uf_find(parent, x):
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        nxt = parent[x]
        parent[x] = root
        x = nxt
    return root


@njit(cache=True)
def uf_labels_from_edges(n, u, v):
    """Union-find (union by size, path compression) over an edge array.
    Returns the root id of every vertex."""
    parent = np.arange(n, dtype=np.int64)
    size = np.ones(n, np.int64)
    for e in range(u.shape[0]):
        ra = _uf_find(parent, np.int64(u[e]))
        rb = _uf_find(parent, np.int64(v[e]))
        if ra != rb:
            if size[ra] < size[rb]:
                ra, rb = rb, ra
            parent[rb] = ra
            size[ra] += size[rb]
    labels = np.empty(n, np.int64)
    for x in range(n):
        labels[x] = _uf_find(parent, x)
    return labels


@njit(cache=True)
def rgg_component_labels_kernel(pts, member_ids, bucket_starts, b, r, ws_size):
    """Component roots of the full geometric graph, without materializing its
    edge list: every vertex unions with its neighbors as they are scanned."""
    n, d = pts.shape
    r2 = r * r
    work = np.empty(ws_size, np.int64)
    parent = np.arange(n, dtype=np.int64)
    size = np.ones(n, np.int64)
    for i in range(n):
        ncand = _gather_candidates(pts, member_ids, bucket_starts, b, d, pts[i], work)
        for t in range(ncand):
            j = work[t]
            if j > i and _dist2(pts, j, pts[i], d) <= r2:
                ra = _uf_find(parent, i)
                rb = _uf_find(parent, j)
                if ra != rb:
                    if size[ra] < size[rb]:
                        ra, rb = rb, ra
                    parent[rb] = ra
                    size[ra] += size[rb]
    labels = np.empty(n, np.int64)
    for x in range(n):
        labels[x] = _uf_find(parent, x)
    return labels
