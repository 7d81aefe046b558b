"""Connectivity structure of revealed irrigation graphs: union-find
components, the connectivity predicate, and detection of isolated
(c+1)-cliques, the canonical obstruction to connectivity.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .irrigation import StageView

__all__ = [
    "ComponentLabeling",
    "CliqueReport",
    "UnionFind",
    "components",
    "is_connected",
    "find_isolated_cliques",
    "export_component_histogram_csv",
]


@dataclass(frozen=True)
class ComponentLabeling:
    """Partition of the vertices into connected components.

    labels[i] is a compact component id in [0, count), assigned in order of
    first appearance by vertex id, so the labeling is independent of edge
    iteration order.
    """

    labels: np.ndarray
    sizes: np.ndarray
    count: int


class UnionFind:
    """Array union-find with path halving and union by size.

    Incremental counterpart of the batch labeling kernel; used by the
    constructive protocol, which interleaves reveals and queries.
    """

    def __init__(self, n: int):
        self.parent = np.arange(n, dtype=np.int64)
        self.size = np.ones(n, dtype=np.int64)
        self.count = n

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return int(x)

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        self.count -= 1
        return True

    def same(self, a: int, b: int) -> bool:
        return self.find(a) == self.find(b)


def _normalize_labels(roots: np.ndarray) -> ComponentLabeling:
    labels = np.empty_like(roots)
    mapping: dict[int, int] = {}
    for i, r in enumerate(roots.tolist()):
        c = mapping.get(r)
        if c is None:
            c = len(mapping)
            mapping[r] = c
        labels[i] = c
    sizes = np.bincount(labels, minlength=len(mapping)).astype(np.int64)
    return ComponentLabeling(labels=labels, sizes=sizes, count=len(mapping))


def components(view: StageView) -> ComponentLabeling:
    """Exact connected components of the revealed undirected graph."""
    u, v = view.edge_arrays()
    roots = _kernels.uf_labels_from_edges(view.n, u, v)
    return _normalize_labels(roots)


def is_connected(view: StageView) -> bool:
    if view.n == 1:
        return True
    return components(view).count == 1


@dataclass(frozen=True)
class CliqueReport:
    """Isolated (c+1)-cliques: components of size exactly c+1 whose induced
    revealed subgraph is complete."""

    cliques: list[tuple[int, ...]]

    @property
    def count(self) -> int:
        return len(self.cliques)


def find_isolated_cliques(view: StageView, c: int) -> CliqueReport:
    """Scan the components of size exactly c+1 and keep the complete ones.

    Requires the full-stage view (all c choices revealed), since the
    obstruction is defined on the final graph.
    """
    if view.stage_count != view.graph.stage_count:
        raise ValueError("clique scan requires the full-stage view")
    lab = components(view)
    target = c + 1
    candidates = np.nonzero(lab.sizes == target)[0]
    if len(candidates) == 0:
        return CliqueReport(cliques=[])
    member_lists: dict[int, list[int]] = {int(cid): [] for cid in candidates}
    for i, l in enumerate(lab.labels.tolist()):
        if l in member_lists:
            member_lists[l].append(i)
    g = view.graph
    cliques = []
    for cid in sorted(member_lists):
        members = member_lists[cid]
        chosen = {i: set(g.choice_list(i).tolist()) for i in members}
        complete = True
        for a_idx in range(len(members)):
            for b_idx in range(a_idx + 1, len(members)):
                a, b = members[a_idx], members[b_idx]
                if b not in chosen[a] and a not in chosen[b]:
                    complete = False
                    break
            if not complete:
                break
        if complete:
            cliques.append(tuple(members))
    return CliqueReport(cliques=cliques)


def export_component_histogram_csv(labeling: ComponentLabeling, path) -> None:
    """Component-size histogram (size, count)."""
    sizes, counts = np.unique(labeling.sizes, return_counts=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["size", "count"])
        for s, k in zip(sizes.tolist(), counts.tolist()):
            w.writerow([s, k])
