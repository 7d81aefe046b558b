"""Sampling of the irrigation (Bluetooth) graph: every vertex keeps an
ordered uniform without-replacement sample of min(c, degree) of its
geometric-graph neighbors.

The choice sequence is drawn once, up front; the budget partition
(b1, ..., bs) only marks stage boundaries inside it. A StageView reveals the
per-vertex prefix allowed by the first s' budgets, which makes the staged
graphs exactly nested: any monotone property is monotone across stages, and
the marginal law of a stage-s' view equals a direct c'-out sample.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .geometry import PointSet
from .rgg import NeighborIndex

__all__ = [
    "IrrigationGraph",
    "StageView",
    "sample_irrigation",
    "undirected_edges",
    "out_neighbors",
    "export_choices_csv",
]


@dataclass(frozen=True)
class IrrigationGraph:
    """Per-vertex ordered choice lists with staged budget boundaries.

    choices_flat/offsets form a CSR ragged array: the choices of vertex i are
    choices_flat[offsets[i]:offsets[i+1]], in sampling order.
    """

    n: int
    radius: float
    seed: int
    budgets: tuple[int, ...]
    choices_flat: np.ndarray
    offsets: np.ndarray
    points: PointSet | None = None

    @property
    def c_total(self) -> int:
        return int(sum(self.budgets))

    @property
    def stage_count(self) -> int:
        return len(self.budgets)

    @property
    def counts(self) -> np.ndarray:
        return np.diff(self.offsets)

    def choice_list(self, i: int) -> np.ndarray:
        return self.choices_flat[self.offsets[i]:self.offsets[i + 1]]

    def view(self, stage_count: int) -> "StageView":
        return StageView(graph=self, stage_count=stage_count)

    def full_view(self) -> "StageView":
        return StageView(graph=self, stage_count=self.stage_count)


@dataclass(frozen=True)
class StageView:
    """Read-only window onto the first `stage_count` budget groups."""

    graph: IrrigationGraph
    stage_count: int

    def __post_init__(self):
        if not 0 <= self.stage_count <= self.graph.stage_count:
            raise ValueError("stage_count out of range")

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def revealed_budget(self) -> int:
        return int(sum(self.graph.budgets[: self.stage_count]))

    def revealed_counts(self) -> np.ndarray:
        """Number of visible choices per vertex: min(sum of revealed
        budgets, |choices|)."""
        return np.minimum(self.graph.counts, self.revealed_budget)

    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Directed choice edges (u -> v) of the revealed prefix, as flat
        arrays (duplicates across directions are fine for union-find)."""
        g = self.graph
        take = self.revealed_counts().astype(np.int64)
        total = int(take.sum())
        if total == 0:
            return np.empty(0, np.int64), np.empty(0, np.int64)
        u = np.repeat(np.arange(g.n, dtype=np.int64), take)
        starts = g.offsets[:-1]
        # position of each revealed slot inside choices_flat
        cum = np.concatenate(([0], np.cumsum(take)[:-1]))
        pos = np.arange(total, dtype=np.int64) - np.repeat(cum, take) + np.repeat(starts, take)
        v = g.choices_flat[pos].astype(np.int64)
        return u, v


def sample_irrigation(index: NeighborIndex, budgets, seed: int) -> IrrigationGraph:
    """Draw the choice lists for every vertex of G_n(r).

    Deterministic in (index, budgets, seed); each vertex's list depends only
    on (seed, vertex id, its neighbor list), never on iteration order.
    """
    budgets = tuple(int(b) for b in budgets)
    if len(budgets) == 0:
        raise ValueError("budgets must be non-empty")
    if any(b < 0 for b in budgets):
        raise ValueError("budgets must be non-negative")
    c = sum(budgets)
    if c < 1:
        raise ValueError("total budget must be at least 1")
    flat_padded, counts = _kernels.sample_choices_kernel(
        index.points.points,
        index.member_ids,
        index.bucket_starts,
        index.buckets_per_side,
        index.radius,
        c,
        np.uint64(seed & (2**64 - 1)),
        index.workspace_size,
    )
    mask = np.arange(c) < counts[:, None]
    choices = flat_padded.reshape(index.n, c)[mask]
    offsets = np.concatenate(([0], np.cumsum(counts, dtype=np.int64)))
    choices.setflags(write=False)
    offsets.setflags(write=False)
    return IrrigationGraph(
        n=index.n,
        radius=index.radius,
        seed=int(seed),
        budgets=budgets,
        choices_flat=choices,
        offsets=offsets,
        points=index.points,
    )


def out_neighbors(view: StageView, i: int) -> list[int]:
    """Revealed prefix of vertex i's choice list."""
    if not 0 <= i < view.n:
        raise ValueError(f"vertex id {i} out of range")
    g = view.graph
    k = min(int(g.offsets[i + 1] - g.offsets[i]), view.revealed_budget)
    return [int(x) for x in g.choices_flat[g.offsets[i]:g.offsets[i] + k]]


def undirected_edges(view: StageView) -> set[tuple[int, int]]:
    """Revealed choice edges made undirected: {(i, j) with i < j}."""
    u, v = view.edge_arrays()
    lo = np.minimum(u, v)
    hi = np.maximum(u, v)
    return set(zip(lo.tolist(), hi.tolist()))


def export_choices_csv(graph: IrrigationGraph, path) -> None:
    """Audit export: one row per directed choice (vertex, rank, chosen)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["vertex", "rank", "chosen"])
        for i in range(graph.n):
            for rank, j in enumerate(graph.choice_list(i)):
                w.writerow([i, rank, int(j)])
