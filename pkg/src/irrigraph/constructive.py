"""The four-phase constructive connectivity protocol, fully instrumented.

Phase 1 explores the stage-1 out-edges from a start vertex to depth
ell = floor(min(delta^2, 1/25) * log2 n) and locates the grid cell densest
in reached vertices. Phase 2 repeatedly reveals stage-2 choices of the
newly found in-cell vertices, doubling the in-cell component until it holds
alpha_d * n * r^d vertices. Phase 3 walks the snake ordering of the grid
from the dense cell, enlisting M = floor(2 alpha_d n r^d / (3 k3)) connected
vertices per cell and revealing stage-3 choices one at a time until the next
cell holds M new members. The final step grows the same process from every
vertex not yet covered, then spends the last single-choice budget of every
vertex outside the start component.

The asymptotic targets floor to trivial values at desk scales (ell = 0
whenever n < 2^25, and M = 0 unless n r^d is in the hundreds); a phase whose
target is degenerate (target < 2, or M < 1) reports success with its
`degenerate` flag set instead of failing, so the protocol stays runnable at
any size. Non-degenerate targets are enforced exactly as stated.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import CellId, Grid, PointSet, cells_of_points, flat_to_cell, grid_for_radius, snake_order_flat
from .graph_analysis import UnionFind
from .irrigation import IrrigationGraph, sample_irrigation
from .rgg import build_index
from .theory import BudgetPlan, TheoryParams, budget_plan, radius_from_delta
from ._kernels import uf_labels_from_edges

__all__ = [
    "Phase1Report",
    "Phase2Report",
    "Phase3Report",
    "ProtocolReport",
    "ProtocolState",
    "phase1_explore",
    "phase2_densify",
    "phase3_propagate",
    "stitch",
    "run_protocol",
]


def _growth_exponent(delta: float) -> float:
    return min(delta * delta, 1.0 / 25.0)


class ProtocolState:
    """Reveal bookkeeping shared by the phases of one protocol run.

    Tracks, per vertex, which budget stages have been revealed (stage 3 is
    revealed choice-by-choice), the union-find of the revealed graph, and a
    growth tag marking which component-growth first reached each vertex.
    Single-threaded by design; parallelism belongs at the trial level.
    """

    def __init__(self, graph: IrrigationGraph, grid: Grid, delta: float):
        if graph.points is None:
            raise ValueError("protocol needs an IrrigationGraph carrying its PointSet")
        if not 0.0 < delta < 1.0:
            raise ValueError("delta must lie in (0,1)")
        self.graph = graph
        self.grid = grid
        self.delta = delta
        self.plan: BudgetPlan | None = None
        self.n = graph.n
        self.vertex_cell = cells_of_points(graph.points.points, grid)
        self.uf = UnionFind(graph.n)
        self.tag = np.full(graph.n, -1, dtype=np.int64)
        self.cum = np.concatenate(([0], np.cumsum(graph.budgets))).astype(np.int64)
        self.stage_done = np.zeros((graph.n, graph.stage_count), dtype=bool)
        self.s3_used = np.zeros(graph.n, dtype=np.int32)
        self.reveal_counts = np.zeros(graph.n, dtype=np.int64)
        self.growths = 0
        self.merges = 0
        self.report1: Phase1Report | None = None
        self.report2: Phase2Report | None = None
        self.report3: Phase3Report | None = None
        self._info1: dict | None = None
        self._info2: dict | None = None

    # -- reveal primitives ------------------------------------------------

    def _stage_bounds(self, v: int, s: int) -> tuple[int, int]:
        cnt = int(self.graph.offsets[v + 1] - self.graph.offsets[v])
        return min(int(self.cum[s]), cnt), min(int(self.cum[s + 1]), cnt)

    def reveal_stage(self, v: int, s: int) -> list[int]:
        """Reveal the whole stage-s slice of v's choices (idempotent)."""
        if s >= self.graph.stage_count or self.stage_done[v, s]:
            return []
        self.stage_done[v, s] = True
        lo, hi = self._stage_bounds(v, s)
        if lo >= hi:
            return []
        off = int(self.graph.offsets[v])
        self.reveal_counts[v] += hi - lo
        return [int(x) for x in self.graph.choices_flat[off + lo:off + hi]]

    def reveal_one_stage3(self, v: int) -> int | None:
        """Reveal the next unrevealed stage-3 choice of v, if any."""
        lo, hi = self._stage_bounds(v, 2)
        k = lo + int(self.s3_used[v])
        if k >= hi:
            return None
        self.s3_used[v] += 1
        self.reveal_counts[v] += 1
        self.stage_done[v, 2] = True
        return int(self.graph.choices_flat[int(self.graph.offsets[v]) + k])

    def join(self, gid: int, v: int, w: int) -> str:
        """Record the revealed edge v->w. Returns 'new' if w enters a grown
        component for the first time, 'internal' if it already belongs to
        this growth, 'merge' if it belongs to an earlier one."""
        t = int(self.tag[w])
        self.uf.union(v, w)
        if t == -1:
            self.tag[w] = gid
            return "new"
        if t == gid:
            return "internal"
        self.merges += 1
        return "merge"

    def revealed_total(self, v: int) -> int:
        return int(self.reveal_counts[v])


# -- reports ---------------------------------------------------------------


def _cell_json(cell: CellId | None):
    return None if cell is None else list(cell.coords)


@dataclass(frozen=True)
class Phase1Report:
    """Outcome of the depth-ell exploration over stage-1 out-edges."""

    ell: int
    generation_sizes: list[int]
    reached: frozenset[int]
    dense_cell: CellId
    dense_count: int
    target: float
    success: bool
    degenerate: bool
    skipped: bool = False
    _state: ProtocolState | None = field(default=None, repr=False, compare=False)

    def to_dict(self) -> dict:
        return {
            "ell": self.ell,
            "generation_sizes": list(self.generation_sizes),
            "reached_count": len(self.reached),
            "dense_cell": _cell_json(self.dense_cell),
            "dense_count": self.dense_count,
            "target": self.target,
            "success": self.success,
            "degenerate": self.degenerate,
            "skipped": self.skipped,
        }


@dataclass(frozen=True)
class Phase2Report:
    """Outcome of the in-cell doubling process over stage-2 choices."""

    rounds: list[int]
    target: float
    L: int
    cumulative: int
    success: bool
    degenerate: bool
    failure_reason: str | None = None
    skipped: bool = False
    _state: ProtocolState | None = field(default=None, repr=False, compare=False)

    def to_dict(self) -> dict:
        return {
            "rounds": list(self.rounds),
            "target": self.target,
            "L": self.L,
            "cumulative": self.cumulative,
            "success": self.success,
            "degenerate": self.degenerate,
            "failure_reason": self.failure_reason,
            "skipped": self.skipped,
        }


@dataclass(frozen=True)
class Phase3Report:
    """Outcome of the snake propagation over stage-3 choices."""

    quota: int
    per_cell_counts: np.ndarray
    failed_cell: CellId | None
    success: bool
    degenerate: bool
    skipped: bool = False
    _state: ProtocolState | None = field(default=None, repr=False, compare=False)

    def to_dict(self) -> dict:
        return {
            "quota": self.quota,
            "per_cell_counts": [int(x) for x in self.per_cell_counts],
            "failed_cell": _cell_json(self.failed_cell),
            "success": self.success,
            "degenerate": self.degenerate,
            "skipped": self.skipped,
        }


@dataclass(frozen=True)
class ProtocolReport:
    """Full run outcome: per-phase trajectories plus final connectivity.

    `stitched` refers to the subgraph actually revealed by the protocol;
    `connected` is the connectivity of the complete irrigation graph (all
    c choices), which the revealed subgraph certifies from below.
    """

    phase1: Phase1Report
    phase2: Phase2Report
    phase3: Phase3Report
    stitched: bool
    connected: bool
    budgets: BudgetPlan
    n: int
    seed: int
    radius: float
    growths: int
    merges: int
    final_reveals: int

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "seed": self.seed,
            "radius": self.radius,
            "budgets": {
                "k1": self.budgets.k1,
                "k2": self.budgets.k2,
                "k3": self.budgets.k3,
                "c_total": self.budgets.c_total,
                "alpha_d": self.budgets.alpha_d,
                "p_d": self.budgets.p_d,
                "eta_d": self.budgets.eta_d,
            },
            "phase1": self.phase1.to_dict(),
            "phase2": self.phase2.to_dict(),
            "phase3": self.phase3.to_dict(),
            "stitched": self.stitched,
            "connected": self.connected,
            "growths": self.growths,
            "merges": self.merges,
            "final_reveals": self.final_reveals,
        }

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=indent)


# -- growth internals --------------------------------------------------------


def _phase1_growth(state: ProtocolState, start: int, gid: int, stop_on_merge: bool) -> dict:
    n = state.n
    ell = int(math.floor(_growth_exponent(state.delta) * math.log2(n))) if n > 1 else 0
    state.tag[start] = gid
    reached = [start]
    gen = [start]
    gen_sizes = [1]
    merged = False
    for _ in range(ell):
        nxt: list[int] = []
        for v in gen:
            for w in state.reveal_stage(v, 0):
                res = state.join(gid, v, w)
                if res == "new":
                    nxt.append(w)
                    reached.append(w)
                elif res == "merge" and stop_on_merge:
                    merged = True
                    break
            if merged:
                break
        gen_sizes.append(len(nxt))
        gen = nxt
        if merged or not gen:
            break
    cells = state.vertex_cell[np.array(reached, dtype=np.int64)]
    counts = np.bincount(cells)
    dense_flat = int(np.argmax(counts))
    dense_count = int(counts[dense_flat])
    target = float(n ** (_growth_exponent(state.delta) / 3.0))
    degenerate = target < 2.0
    success = (not merged) and (degenerate or dense_count >= target)
    return {
        "ell": ell,
        "gen_sizes": gen_sizes,
        "reached": reached,
        "dense_flat": dense_flat,
        "dense_count": dense_count,
        "target": target,
        "degenerate": degenerate,
        "success": success,
        "merged": merged,
    }


def _phase2_growth(state: ProtocolState, gid: int, info1: dict, plan: BudgetPlan,
                   stop_on_merge: bool) -> dict:
    n = state.n
    r = state.graph.radius
    d = state.grid.dim
    target = plan.alpha_d * n * r**d
    base = float(n ** (_growth_exponent(state.delta) / 3.0))
    degenerate = target < 2.0
    L = int(math.floor(math.log2(target / base))) if target > base else 0
    dense = info1["dense_flat"]
    cell_members = sorted(v for v in info1["reached"] if state.vertex_cell[v] == dense)
    frontier = cell_members
    cumulative = len(cell_members)
    rounds: list[int] = []
    merged = False
    failure: str | None = None
    success = degenerate or cumulative >= target
    i = 0
    while not success and failure is None and not merged:
        i += 1
        if i > L:
            failure = "round-limit"
            break
        new_in: list[int] = []
        for v in frontier:
            for w in state.reveal_stage(v, 1):
                res = state.join(gid, v, w)
                if res == "new":
                    if state.vertex_cell[w] == dense:
                        new_in.append(w)
                elif res == "merge" and stop_on_merge:
                    merged = True
                    break
            if merged:
                break
        rounds.append(len(new_in))
        cumulative += len(new_in)
        cell_members.extend(new_in)
        if merged:
            break
        if cumulative >= target:
            success = True
            break
        if len(new_in) < (2.0**i) * base:
            failure = "quota"
            break
        frontier = new_in
    return {
        "rounds": rounds,
        "target": float(target),
        "L": L,
        "cumulative": cumulative,
        "cell_members": cell_members,
        "dense_flat": dense,
        "degenerate": degenerate,
        "success": success and not merged,
        "failure_reason": failure,
        "merged": merged,
    }


def _phase3_growth(state: ProtocolState, gid: int, info2: dict, plan: BudgetPlan,
                   stop_on_merge: bool) -> dict:
    n = state.n
    r = state.graph.radius
    d = state.grid.dim
    target2 = plan.alpha_d * n * r**d
    quota = int(math.floor(2.0 * target2 / (3.0 * plan.k3)))
    degenerate = quota < 1
    n_cells = state.grid.n_cells
    per_cell = np.zeros(n_cells, dtype=np.int64)
    dense = info2["dense_flat"]
    per_cell[dense] = info2["cumulative"]
    merged = False
    success = True
    failed_flat: int | None = None
    if not degenerate and n_cells > 1:
        snake = snake_order_flat(state.grid)
        pos = int(np.nonzero(snake == dense)[0][0])
        members = sorted(info2["cell_members"])
        fwd_src = members[:quota]
        rem = members[quota:]
        bwd_src = rem[:quota] if len(rem) >= quota else rem + members[: quota - len(rem)]
        for arm, first_src in ((snake[pos:], fwd_src), (snake[pos::-1], bwd_src)):
            enlisted = list(first_src)
            for t in range(len(arm) - 1):
                nxt_cell = int(arm[t + 1])
                found: list[int] = []
                for v in enlisted:
                    while len(found) < quota:
                        w = state.reveal_one_stage3(v)
                        if w is None:
                            break
                        res = state.join(gid, v, w)
                        if res == "new" and state.vertex_cell[w] == nxt_cell:
                            found.append(w)
                        elif res == "merge" and stop_on_merge:
                            merged = True
                            break
                    if merged or len(found) >= quota:
                        break
                if merged:
                    break
                per_cell[nxt_cell] = len(found)
                if len(found) < quota:
                    success = False
                    failed_flat = nxt_cell
                    break
                enlisted = found
            if merged or not success:
                break
    return {
        "quota": quota,
        "per_cell": per_cell,
        "failed_flat": failed_flat,
        "degenerate": degenerate,
        "success": success and not merged,
        "merged": merged,
    }


def _grow(state: ProtocolState, start: int, gid: int, plan: BudgetPlan) -> None:
    """Grow a component from `start`, aborting as soon as it touches an
    earlier one (the final-step rule of the protocol)."""
    info1 = _phase1_growth(state, start, gid, stop_on_merge=True)
    if info1["merged"] or not info1["success"]:
        return
    info2 = _phase2_growth(state, gid, info1, plan, stop_on_merge=True)
    if info2["merged"] or not info2["success"]:
        return
    _phase3_growth(state, gid, info2, plan, stop_on_merge=True)


# -- public phases -----------------------------------------------------------


def phase1_explore(start: int, graph: IrrigationGraph, grid: Grid, delta: float) -> Phase1Report:
    """Directed exploration to depth ell over stage-1 choices; reports the
    reached set, per-generation sizes, and the densest grid cell."""
    if graph.budgets[0] < 1:
        raise ValueError("phase 1 needs a stage-1 budget of at least 1")
    if not 0 <= start < graph.n:
        raise ValueError("start vertex out of range")
    state = ProtocolState(graph, grid, delta)
    info = _phase1_growth(state, start, gid=0, stop_on_merge=False)
    state.growths = 1
    report = Phase1Report(
        ell=info["ell"],
        generation_sizes=info["gen_sizes"],
        reached=frozenset(info["reached"]),
        dense_cell=flat_to_cell(info["dense_flat"], grid),
        dense_count=info["dense_count"],
        target=info["target"],
        success=info["success"],
        degenerate=info["degenerate"],
        _state=state,
    )
    state.report1 = report
    state._info1 = info
    return report


def phase2_densify(report1: Phase1Report, graph: IrrigationGraph, plan: BudgetPlan) -> Phase2Report:
    """Doubling rounds over stage-2 choices of the newly found in-cell
    vertices, until the dense cell holds alpha_d * n * r^d component
    members."""
    if not report1.success:
        raise ValueError("phase 2 requires a successful phase-1 report")
    state = report1._state
    if state is None or state.graph is not graph:
        raise ValueError("report does not belong to this graph")
    if state.report2 is not None:
        raise ValueError("phase 2 already ran for this protocol state")
    state.plan = plan
    info = _phase2_growth(state, 0, state._info1, plan, stop_on_merge=False)
    report = Phase2Report(
        rounds=info["rounds"],
        target=info["target"],
        L=info["L"],
        cumulative=info["cumulative"],
        success=info["success"],
        degenerate=info["degenerate"],
        failure_reason=info["failure_reason"],
        _state=state,
    )
    state.report2 = report
    state._info2 = info
    return report


def phase3_propagate(report2: Phase2Report, graph: IrrigationGraph, grid: Grid,
                     plan: BudgetPlan) -> Phase3Report:
    """Snake walk from the dense cell, filling every cell with at least
    M = floor(2 alpha_d n r^d / (3 k3)) component members."""
    if not report2.success:
        raise ValueError("phase 3 requires a successful phase-2 report")
    state = report2._state
    if state is None or state.graph is not graph:
        raise ValueError("report does not belong to this graph")
    if state.report3 is not None:
        raise ValueError("phase 3 already ran for this protocol state")
    info = _phase3_growth(state, 0, state._info2, plan, stop_on_merge=False)
    report = Phase3Report(
        quota=info["quota"],
        per_cell_counts=info["per_cell"],
        failed_cell=None if info["failed_flat"] is None else flat_to_cell(info["failed_flat"], grid),
        success=info["success"],
        degenerate=info["degenerate"],
        _state=state,
    )
    state.report3 = report
    return report


def _skipped_phase2(state: ProtocolState) -> Phase2Report:
    report = Phase2Report(rounds=[], target=0.0, L=0, cumulative=0, success=False,
                          degenerate=False, failure_reason="skipped", skipped=True, _state=state)
    state.report2 = report
    return report


def _skipped_phase3(state: ProtocolState) -> Phase3Report:
    report = Phase3Report(quota=0, per_cell_counts=np.zeros(state.grid.n_cells, dtype=np.int64),
                          failed_cell=None, success=False, degenerate=False, skipped=True,
                          _state=state)
    state.report3 = report
    return report


def _full_graph_connected(graph: IrrigationGraph) -> bool:
    if graph.n == 1:
        return True
    u, v = graph.full_view().edge_arrays()
    labels = uf_labels_from_edges(graph.n, u, v)
    return bool(np.all(labels == labels[0]))


def stitch(protocol_state: ProtocolState, graph: IrrigationGraph) -> ProtocolReport:
    """Final step: grow a component from every vertex not yet covered
    (aborting growths that touch an earlier component), then spend the
    final single-choice budget of every vertex outside the start component.

    `stitched` records whether the revealed subgraph ends up connected;
    `connected` is the connectivity of the full irrigation graph.
    """
    state = protocol_state
    if state.graph is not graph:
        raise ValueError("state does not belong to this graph")
    if state.report1 is None or state.plan is None:
        raise ValueError("run phases 1-3 (or at least phase 2's plan) before stitching")
    for v in range(state.n):
        if state.tag[v] == -1:
            gid = state.growths
            state.growths += 1
            _grow(state, v, gid, state.plan)
    final_reveals = 0
    if state.uf.count > 1 and state.graph.stage_count >= 4:
        root1 = state.uf.find(0)
        outside = [v for v in range(state.n) if state.uf.find(v) != root1]
        for v in outside:
            for w in state.reveal_stage(v, 3):
                state.join(int(state.tag[v]), v, w)
                final_reveals += 1
    stitched = state.uf.count == 1
    connected = _full_graph_connected(graph)
    assert state.report2 is not None and state.report3 is not None
    return ProtocolReport(
        phase1=state.report1,
        phase2=state.report2,
        phase3=state.report3,
        stitched=stitched,
        connected=connected,
        budgets=state.plan,
        n=state.n,
        seed=graph.seed,
        radius=graph.radius,
        growths=state.growths,
        merges=state.merges,
        final_reveals=final_reveals,
    )


def run_protocol(points: PointSet, params: TheoryParams, seed: int) -> ProtocolReport:
    """Compose the whole pipeline: radius from delta, index, budget plan,
    staged irrigation sample, phases 1-3 from vertex 0, and the stitch.
    Deterministic in (points, params, seed)."""
    if params.d != points.dim:
        raise ValueError("params.d does not match the point set")
    if params.n and params.n != points.n:
        raise ValueError("params.n does not match the point set")
    r = radius_from_delta(points.n, params.d, params.delta, params.gamma)
    index = build_index(points, r)
    plan = budget_plan(params)
    graph = sample_irrigation(index, plan.budgets, seed)
    grid = grid_for_radius(r, points.dim)
    rep1 = phase1_explore(0, graph, grid, params.delta)
    state = rep1._state
    state.plan = plan
    if rep1.success:
        rep2 = phase2_densify(rep1, graph, plan)
    else:
        rep2 = _skipped_phase2(state)
    if rep2.success:
        phase3_propagate(rep2, graph, grid, plan)
    else:
        _skipped_phase3(state)
    return stitch(state, graph)
