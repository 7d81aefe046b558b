"""Toroidal geometry: point sampling, the wrapped metric, ball volumes, and
the analysis grid with its snake (boustrophedon) cell ordering.

All coordinates live on the d-dimensional unit torus [0,1)^d. Distances wrap
per coordinate: |x-y| is replaced by min(|x-y|, 1-|x-y|) before combining
Euclidean-style, so the diameter of the space is sqrt(d)/2.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "PointSet",
    "Grid",
    "CellId",
    "torus_distance",
    "sample_points",
    "ball_volume",
    "grid_for_radius",
    "cell_of",
    "cells_of_points",
    "cell_to_flat",
    "flat_to_cell",
    "snake_order",
    "snake_order_flat",
]


@dataclass(frozen=True)
class PointSet:
    """n points in [0,1)^d with torus semantics.

    Immutable after construction (the coordinate array is write-locked).
    `seed` records how the set was generated; crafted sets use seed=0.
    """

    dim: int
    points: np.ndarray
    seed: int = 0

    def __post_init__(self):
        pts = np.ascontiguousarray(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != self.dim:
            raise ValueError(f"points must have shape (n, {self.dim})")
        if pts.shape[0] < 1:
            raise ValueError("need at least one point")
        if np.any(pts < 0.0) or np.any(pts >= 1.0):
            raise ValueError("coordinates must lie in [0,1)")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    def to_csv(self, path) -> None:
        """Write header row (n, d, seed) followed by one row per point."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([self.n, self.dim, self.seed])
            for row in self.points:
                w.writerow([repr(float(x)) for x in row])

    @classmethod
    def from_csv(cls, path) -> "PointSet":
        with open(path, newline="") as fh:
            r = csv.reader(fh)
            n, d, seed = (int(x) for x in next(r))
            pts = np.array([[float(x) for x in row] for row in r], dtype=np.float64)
        if pts.shape != (n, d):
            raise ValueError("point file does not match its header")
        return cls(dim=d, points=pts, seed=seed)


@dataclass(frozen=True)
class Grid:
    """Partition of the torus into cells_per_side^d congruent cubes.

    cells_per_side = ceil(2*sqrt(d)/radius), so the cell side is at most
    radius/(2*sqrt(d)): any point of a cell and any point of a face-adjacent
    cell are within `radius` of each other.
    """

    dim: int
    cells_per_side: int
    side: float
    radius: float

    @property
    def n_cells(self) -> int:
        return self.cells_per_side**self.dim


@dataclass(frozen=True)
class CellId:
    """Integer coordinates of a grid cell, each in [0, cells_per_side)."""

    coords: tuple[int, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(int(c) for c in self.coords))


def torus_distance(x, y) -> float:
    """Wrapped Euclidean distance on the unit torus.

    Each coordinate difference is reduced to min(|dx|, 1-|dx|) before the
    usual Euclidean combination, so the result never exceeds sqrt(d)/2.
    """
    xa = np.asarray(x, dtype=np.float64)
    ya = np.asarray(y, dtype=np.float64)
    if xa.shape != ya.shape or xa.ndim != 1:
        raise ValueError("coordinate vectors must share one dimension d")
    dx = np.abs(xa - ya)
    dx = np.minimum(dx, 1.0 - dx)
    return float(math.sqrt(float(np.dot(dx, dx))))


def sample_points(n: int, d: int, seed: int) -> PointSet:
    """Sample n i.i.d. uniform points in [0,1)^d.

    Uses the counter-based Philox generator keyed by `seed`, so results are
    reproducible and independent of any other stream in the process.
    """
    if n < 1 or d < 1:
        raise ValueError("n and d must be positive")
    rng = np.random.Generator(np.random.Philox(key=np.uint64(seed & (2**64 - 1))))
    pts = rng.random((n, d))
    return PointSet(dim=d, points=pts, seed=seed)


def ball_volume(d: int) -> float:
    """Volume pi^(d/2)/Gamma(d/2+1) of the Euclidean unit ball in R^d."""
    if d < 1:
        raise ValueError("dimension must be >= 1")
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


def grid_for_radius(r: float, d: int) -> Grid:
    """Analysis grid with cells_per_side = ceil(2*sqrt(d)/r)."""
    if r <= 0:
        raise ValueError("radius must be positive")
    if d < 1:
        raise ValueError("dimension must be >= 1")
    m = math.ceil(2.0 * math.sqrt(d) / r)
    return Grid(dim=d, cells_per_side=m, side=1.0 / m, radius=float(r))


def cell_of(point, grid: Grid) -> CellId:
    """Cell containing a point; floor(coord*m) clamped to m-1."""
    p = np.asarray(point, dtype=np.float64)
    if p.shape != (grid.dim,):
        raise ValueError("point dimension does not match grid")
    m = grid.cells_per_side
    coords = np.minimum((p * m).astype(np.int64), m - 1)
    return CellId(tuple(int(c) for c in coords))


def cells_of_points(points: np.ndarray, grid: Grid) -> np.ndarray:
    """Flat cell index for every row of an (n, d) coordinate array."""
    m = grid.cells_per_side
    coords = np.minimum((points * m).astype(np.int64), m - 1)
    flat = np.zeros(len(points), dtype=np.int64)
    for k in range(grid.dim):
        flat = flat * m + coords[:, k]
    return flat


def cell_to_flat(cell: CellId, grid: Grid) -> int:
    """Row-major flat index of a cell (bijective with coordinates)."""
    m = grid.cells_per_side
    idx = 0
    for c in cell.coords:
        if not 0 <= c < m:
            raise ValueError("cell coordinate out of range")
        idx = idx * m + c
    return idx


def flat_to_cell(index: int, grid: Grid) -> CellId:
    m = grid.cells_per_side
    if not 0 <= index < grid.n_cells:
        raise ValueError("flat index out of range")
    coords = []
    for _ in range(grid.dim):
        coords.append(index % m)
        index //= m
    return CellId(tuple(reversed(coords)))


def snake_order_flat(grid: Grid) -> np.ndarray:
    """Flat indices of all cells in boustrophedon order.

    Consecutive cells differ by +-1 in exactly one coordinate (they share a
    (d-1)-face); torus wrap is never used for this adjacency. Coordinate 0
    varies fastest.
    """
    m = grid.cells_per_side
    d = grid.dim
    total = m**d
    out = np.empty(total, dtype=np.int64)
    pows = [m**k for k in range(d)]
    for t in range(total):
        # peel coordinates from slowest (d-1) to fastest (0); odd blocks are
        # traversed in reverse, which the index flip below normalizes away
        rem = t
        rev = False
        flat = 0
        for k in range(d - 1, -1, -1):
            block = pows[k]
            if rev:
                rem = block * m - 1 - rem
            q, rem = divmod(rem, block)
            flat += q * pows[d - 1 - k]  # coordinate k in the row-major flat index
            rev = q % 2 == 1
        out[t] = flat
    return out


def snake_order(grid: Grid) -> list[CellId]:
    """Boustrophedon enumeration of all cells as CellIds."""
    return [flat_to_cell(int(i), grid) for i in snake_order_flat(grid)]
