"""The geometric graph G_n(r): a bucket-grid index answering exact radius
queries under the torus metric.

Adjacency is never materialized as a global edge list; neighbor lists are
computed per query from the 3^d surrounding buckets, which keeps memory O(n)
even at n = 10^6. Two vertices are adjacent iff their wrapped distance is
<= r (closed ball).
"""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .geometry import PointSet

__all__ = [
    "NeighborIndex",
    "DegreeStats",
    "build_index",
    "neighbors_of",
    "query_radius",
    "degrees",
    "degree_stats",
    "rgg_component_labels",
    "export_edges_csv",
]


@dataclass
class NeighborIndex:
    """Spatial hash of a PointSet for fixed-radius queries.

    Bucket side 1/b is at least r, so all candidates for a radius-r query
    live in the 3^d buckets around the query point (with torus wrap).
    Immutable after build; concurrent reads are safe.
    """

    points: PointSet
    radius: float
    buckets_per_side: int
    member_ids: np.ndarray = field(repr=False)  # vertex ids sorted by bucket
    bucket_starts: np.ndarray = field(repr=False)  # CSR offsets, len b^d + 1
    bucket_of: np.ndarray = field(repr=False)  # flat bucket id per vertex
    workspace_size: int = field(repr=False, default=0)

    @property
    def n(self) -> int:
        return self.points.n

    @property
    def dim(self) -> int:
        return self.points.dim

    @property
    def buckets(self) -> dict[int, list[int]]:
        """Occupied buckets as {flat bucket id: sorted vertex ids}."""
        out: dict[int, list[int]] = {}
        starts = self.bucket_starts
        for flat in range(len(starts) - 1):
            if starts[flat + 1] > starts[flat]:
                out[flat] = sorted(int(v) for v in self.member_ids[starts[flat]:starts[flat + 1]])
        return out


def _buckets_per_side(r: float, n: int, d: int) -> int:
    b = max(1, int(math.floor(1.0 / r))) if r < 1.0 else 1
    # keep the bucket table O(n) when r is far below the interesting scales;
    # a coarser grid only widens the candidate set, never misses a neighbor
    cap = max(1, int(math.ceil((8.0 * n) ** (1.0 / d))))
    b = min(b, cap)
    while b > 1 and 1.0 / b < r:  # guard against float rounding
        b -= 1
    return b


def build_index(points: PointSet, r: float) -> NeighborIndex:
    """Bucket the points for radius-r queries."""
    if r <= 0:
        raise ValueError("radius must be positive")
    b = _buckets_per_side(r, points.n, points.dim)
    pts = points.points
    coords = np.minimum((pts * b).astype(np.int64), b - 1)
    flat = np.zeros(points.n, dtype=np.int64)
    for k in range(points.dim):
        flat = flat * b + coords[:, k]
    order = np.argsort(flat, kind="stable")
    sorted_flat = flat[order]
    starts = np.searchsorted(sorted_flat, np.arange(b**points.dim + 1))
    max_bucket = int(np.max(np.diff(starts))) if len(starts) > 1 else points.n
    ws = max(1, min(points.n, (3**points.dim) * max_bucket))
    member_ids = order.astype(np.int64)
    member_ids.setflags(write=False)
    starts = starts.astype(np.int64)
    starts.setflags(write=False)
    flat.setflags(write=False)
    return NeighborIndex(
        points=points,
        radius=float(r),
        buckets_per_side=b,
        member_ids=member_ids,
        bucket_starts=starts,
        bucket_of=flat,
        workspace_size=ws,
    )


def _candidate_ids(index: NeighborIndex, x: np.ndarray) -> np.ndarray:
    """Vertex ids from the deduplicated 3^d buckets around x."""
    b = index.buckets_per_side
    axis_vals = []
    for k in range(index.dim):
        q = min(int(x[k] * b), b - 1)
        axis_vals.append(sorted({(q - 1) % b, q, (q + 1) % b}))
    chunks = []
    starts = index.bucket_starts
    for combo in itertools.product(*axis_vals):
        flat = 0
        for c in combo:
            flat = flat * b + c
        chunks.append(index.member_ids[starts[flat]:starts[flat + 1]])
    return np.concatenate(chunks) if chunks else np.empty(0, dtype=np.int64)


def query_radius(index: NeighborIndex, x, strict: bool = False) -> np.ndarray:
    """All vertex ids within distance r of an arbitrary center (sorted)."""
    xa = np.asarray(x, dtype=np.float64)
    if xa.shape != (index.dim,):
        raise ValueError("center dimension does not match index")
    cand = _candidate_ids(index, xa)
    if len(cand) == 0:
        return cand
    dx = np.abs(index.points.points[cand] - xa)
    dx = np.minimum(dx, 1.0 - dx)
    d2 = np.einsum("ij,ij->i", dx, dx)
    r2 = index.radius * index.radius
    mask = d2 < r2 if strict else d2 <= r2
    return np.sort(cand[mask])


def neighbors_of(index: NeighborIndex, i: int) -> np.ndarray:
    """Sorted ids of all j != i with wrapped distance <= r from vertex i."""
    if not 0 <= i < index.n:
        raise ValueError(f"vertex id {i} out of range")
    ids = query_radius(index, index.points.points[i])
    return ids[ids != i]


def degrees(index: NeighborIndex) -> np.ndarray:
    """Degree of every vertex in G_n(r), computed in one bucket sweep."""
    return _kernels.degrees_kernel(
        index.points.points,
        index.member_ids,
        index.bucket_starts,
        index.buckets_per_side,
        index.radius,
        index.workspace_size,
    )


@dataclass(frozen=True)
class DegreeStats:
    histogram: np.ndarray  # histogram[k] = number of vertices of degree k
    min: int
    mean: float
    max: int


def degree_stats(index: NeighborIndex) -> DegreeStats:
    deg = degrees(index)
    return DegreeStats(
        histogram=np.bincount(deg),
        min=int(deg.min()),
        mean=float(deg.mean()),
        max=int(deg.max()),
    )


def rgg_component_labels(index: NeighborIndex) -> np.ndarray:
    """Connected-component root per vertex of the unsparsified graph."""
    return _kernels.rgg_component_labels_kernel(
        index.points.points,
        index.member_ids,
        index.bucket_starts,
        index.buckets_per_side,
        index.radius,
        index.workspace_size,
    )


def export_edges_csv(index: NeighborIndex, path) -> None:
    """Edge list (i, j with i < j) for small-n cross-validation."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["i", "j"])
        for i in range(index.n):
            for j in neighbors_of(index, i):
                if i < j:
                    w.writerow([i, int(j)])
