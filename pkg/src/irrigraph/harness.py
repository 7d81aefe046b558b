"""Monte Carlo experiment driver: connectivity estimates, threshold sweeps
over the budget c and the radius r, isolated-clique scans, regularity
audits, and batch protocol runs.

Every record is a pure function of its config (trial t uses seed XOR t, and
each trial owns its streams), so runs are reproducible and trials may be
farmed out to a process pool (IRRIGRAPH_WORKERS) without changing output:
results are reduced in trial order.
"""

from __future__ import annotations

import dataclasses
import functools
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .geometry import sample_points
from .graph_analysis import find_isolated_cliques, is_connected
from .irrigation import sample_irrigation
from .rgg import build_index, rgg_component_labels
from .theory import TheoryParams, check_regularity, penrose_radius, radius_from_delta
from .constructive import run_protocol

__all__ = [
    "ExperimentConfig",
    "Row",
    "ExperimentRecord",
    "wilson_interval",
    "resolve_radius",
    "estimate_connectivity",
    "sweep_c",
    "sweep_r",
    "clique_scan",
    "regularity_audit",
    "protocol_batch",
    "record_to_json",
    "record_from_json",
    "record_to_csv",
    "record_from_csv",
]

MODES = frozenset({"connectivity", "sweep_r", "clique_scan", "protocol", "regularity"})


@dataclass(frozen=True)
class ExperimentConfig:
    """Declarative description of one experiment.

    The radius comes from exactly one of: an explicit r, a (delta, gamma)
    pair, or a multiple of the connectivity-threshold radius. sweep_r mode
    instead takes an ascending list r_values.
    """

    n: int
    d: int
    mode: str = "connectivity"
    c_values: tuple[int, ...] = ()
    trials: int = 100
    seed: int = 0
    eps: float = 0.1
    r: float | None = None
    delta: float | None = None
    gamma: float = 1.0
    penrose_mult: float | None = None
    r_values: tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "c_values", tuple(int(c) for c in self.c_values))
        object.__setattr__(self, "r_values", tuple(float(r) for r in self.r_values))
        if self.n < 1 or self.d < 1:
            raise ValueError("n and d must be positive")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if any(c < 1 for c in self.c_values):
            raise ValueError("budgets must be >= 1")
        if self.mode in ("connectivity", "clique_scan") and not self.c_values:
            raise ValueError(f"mode {self.mode} needs c_values")
        if self.mode == "sweep_r":
            if not self.r_values:
                raise ValueError("sweep_r needs r_values")
            if list(self.r_values) != sorted(self.r_values):
                raise ValueError("r_values must be ascending")
        else:
            given = sum(x is not None for x in (self.r, self.delta, self.penrose_mult))
            if given != 1:
                raise ValueError("specify exactly one of r, delta, penrose_mult")


def resolve_radius(config: ExperimentConfig) -> float:
    if config.r is not None:
        r = float(config.r)
    elif config.delta is not None:
        r = radius_from_delta(config.n, config.d, config.delta, config.gamma)
    else:
        r = config.penrose_mult * penrose_radius(config.n, config.d)
    if r <= 0:
        raise ValueError("resolved radius must be positive")
    return r


def wilson_interval(successes: int, trials: int, z: float = 1.96) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion (95% by default)."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    p = successes / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = (p + z2 / (2 * trials)) / denom
    margin = (z / denom) * math.sqrt(p * (1 - p) / trials + z2 / (4 * trials * trials))
    # round-off must never push p_hat outside its own interval
    return min(p, max(0.0, center - margin)), max(p, min(1.0, center + margin))


@dataclass(frozen=True)
class Row:
    param: str
    value: float
    successes: int
    trials: int
    p_hat: float
    ci_low: float
    ci_high: float


def _make_row(param: str, value, successes: int, trials: int) -> Row:
    lo, hi = wilson_interval(successes, trials)
    return Row(param=param, value=value, successes=successes, trials=trials,
               p_hat=successes / trials, ci_low=lo, ci_high=hi)


@dataclass
class ExperimentRecord:
    """Config echo plus one outcome row per swept value.

    wall_time is informational only and never serialized, so emitted files
    are byte-identical across reruns.
    """

    config: ExperimentConfig
    rows: list[Row]
    empirical_threshold: int | None = None
    extra: dict = field(default_factory=dict)
    wall_time: float | None = None


def _n_workers() -> int:
    try:
        return max(1, int(os.environ.get("IRRIGRAPH_WORKERS", "1")))
    except ValueError:
        return 1


def _map_trials(fn, trials: int):
    workers = _n_workers()
    if workers == 1:
        return [fn(t) for t in range(trials)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(trials)))


# -- trial bodies (module level so the process pool can pickle them) --------


def _connectivity_trial(t: int, config: ExperimentConfig, r: float,
                        cs: tuple[int, ...]) -> list[bool]:
    trial_seed = config.seed ^ t
    points = sample_points(config.n, config.d, trial_seed)
    index = build_index(points, r)
    budgets = [cs[0]] + [b - a for a, b in zip(cs, cs[1:])]
    graph = sample_irrigation(index, budgets, trial_seed)
    return [is_connected(graph.view(s)) for s in range(1, len(cs) + 1)]


def _sweep_r_trial(t: int, config: ExperimentConfig, c: int) -> list[bool]:
    trial_seed = config.seed ^ t
    points = sample_points(config.n, config.d, trial_seed)
    out = []
    for r in config.r_values:
        if r <= 0:
            out.append(config.n == 1)
            continue
        index = build_index(points, r)
        if c >= config.n - 1:
            labels = rgg_component_labels(index)
            out.append(bool(np.all(labels == labels[0])))
        else:
            graph = sample_irrigation(index, [c], trial_seed)
            out.append(is_connected(graph.full_view()))
    return out


def _clique_trial(t: int, config: ExperimentConfig, r: float) -> list[int]:
    trial_seed = config.seed ^ t
    points = sample_points(config.n, config.d, trial_seed)
    index = build_index(points, r)
    counts = []
    for c in config.c_values:
        graph = sample_irrigation(index, [c], trial_seed)
        counts.append(find_isolated_cliques(graph.full_view(), c).count)
    return counts


def _protocol_trial(t: int, config: ExperimentConfig) -> dict:
    trial_seed = config.seed ^ t
    points = sample_points(config.n, config.d, trial_seed)
    params = TheoryParams(delta=config.delta, eps=config.eps, d=config.d,
                          gamma=config.gamma, n=config.n)
    rep = run_protocol(points, params, trial_seed)
    return {
        "connected": rep.connected,
        "stitched": rep.stitched,
        "phase1": rep.phase1.success,
        "phase2": rep.phase2.success,
        "phase3": rep.phase3.success,
        "c_total": rep.budgets.c_total,
    }


def _regularity_trial(t: int, config: ExperimentConfig, r: float) -> dict:
    trial_seed = config.seed ^ t
    points = sample_points(config.n, config.d, trial_seed)
    rep = check_regularity(points, r, config.eps)
    return {
        "holds": rep.holds,
        "ball_ratio_min": rep.ball_ratio_min,
        "ball_ratio_max": rep.ball_ratio_max,
        "cube_ratio_min": rep.cube_ratio_min,
        "cube_ratio_max": rep.cube_ratio_max,
    }


# -- experiment drivers ------------------------------------------------------


def estimate_connectivity(config: ExperimentConfig) -> ExperimentRecord:
    """Connectivity probability per c, with Wilson 95% intervals.

    Trials are coupled across c through staged budgets (one sample, nested
    reveals), so per-seed outcomes are monotone in c by construction.
    """
    if config.mode != "connectivity":
        raise ValueError("config.mode must be 'connectivity'")
    cs = tuple(sorted(set(config.c_values)))
    r = resolve_radius(config)
    start = time.perf_counter()
    results = _map_trials(
        functools.partial(_connectivity_trial, config=config, r=r, cs=cs), config.trials)
    rows = []
    threshold = None
    for ci, c in enumerate(cs):
        successes = sum(res[ci] for res in results)
        rows.append(_make_row("c", c, successes, config.trials))
        if threshold is None and successes / config.trials >= 0.5:
            threshold = c
    return ExperimentRecord(config=config, rows=rows, empirical_threshold=threshold,
                            wall_time=time.perf_counter() - start)


def sweep_c(config: ExperimentConfig) -> ExperimentRecord:
    """estimate_connectivity plus the empirical threshold (smallest c with
    p_hat >= 0.5); requires an ascending c list."""
    if list(config.c_values) != sorted(set(config.c_values)):
        raise ValueError("c_values must be strictly ascending")
    return estimate_connectivity(config)


def sweep_r(config: ExperimentConfig) -> ExperimentRecord:
    """Connectivity probability vs radius at fixed c, with point sets
    coupled across radii (choices are re-sampled per radius, since the
    neighborhoods change)."""
    if config.mode != "sweep_r":
        raise ValueError("config.mode must be 'sweep_r'")
    c = config.c_values[0] if config.c_values else config.n
    start = time.perf_counter()
    results = _map_trials(functools.partial(_sweep_r_trial, config=config, c=c), config.trials)
    rows = []
    for ri, r in enumerate(config.r_values):
        successes = sum(res[ri] for res in results)
        rows.append(_make_row("r", r, successes, config.trials))
    return ExperimentRecord(config=config, rows=rows,
                            wall_time=time.perf_counter() - start)


def clique_scan(config: ExperimentConfig) -> ExperimentRecord:
    """Frequency of at least one isolated (c+1)-clique, and mean counts."""
    if config.mode != "clique_scan":
        raise ValueError("config.mode must be 'clique_scan'")
    r = resolve_radius(config)
    start = time.perf_counter()
    results = _map_trials(functools.partial(_clique_trial, config=config, r=r), config.trials)
    rows = []
    means = {}
    for ci, c in enumerate(config.c_values):
        counts = [res[ci] for res in results]
        successes = sum(1 for k in counts if k >= 1)
        rows.append(_make_row("c", c, successes, config.trials))
        means[str(c)] = sum(counts) / config.trials
    return ExperimentRecord(config=config, rows=rows, extra={"mean_clique_counts": means},
                            wall_time=time.perf_counter() - start)


def protocol_batch(config: ExperimentConfig) -> ExperimentRecord:
    """run_protocol over seeded trials; one row per reported flag."""
    if config.mode != "protocol":
        raise ValueError("config.mode must be 'protocol'")
    if config.delta is None:
        raise ValueError("protocol mode needs a delta radius spec")
    start = time.perf_counter()
    results = _map_trials(functools.partial(_protocol_trial, config=config), config.trials)
    c_total = results[0]["c_total"]
    rows = [
        _make_row(name, c_total, sum(res[name] for res in results), config.trials)
        for name in ("connected", "stitched", "phase1", "phase2", "phase3")
    ]
    return ExperimentRecord(config=config, rows=rows,
                            wall_time=time.perf_counter() - start)


def regularity_audit(config: ExperimentConfig) -> ExperimentRecord:
    """Fraction of seeds on which the discretized regularity event holds."""
    if config.mode != "regularity":
        raise ValueError("config.mode must be 'regularity'")
    r = resolve_radius(config)
    start = time.perf_counter()
    results = _map_trials(functools.partial(_regularity_trial, config=config, r=r), config.trials)
    successes = sum(res["holds"] for res in results)
    rows = [_make_row("regularity", config.eps, successes, config.trials)]
    extra = {
        "ball_ratio_min": min(res["ball_ratio_min"] for res in results),
        "ball_ratio_max": max(res["ball_ratio_max"] for res in results),
        "cube_ratio_min": min(res["cube_ratio_min"] for res in results),
        "cube_ratio_max": max(res["cube_ratio_max"] for res in results),
    }
    return ExperimentRecord(config=config, rows=rows, extra=extra,
                            wall_time=time.perf_counter() - start)


# -- serialization -----------------------------------------------------------


def _config_to_dict(config: ExperimentConfig) -> dict:
    d = dataclasses.asdict(config)
    d["c_values"] = list(d["c_values"])
    d["r_values"] = list(d["r_values"])
    return d


def _config_from_dict(d: dict) -> ExperimentConfig:
    d = dict(d)
    d["c_values"] = tuple(d.get("c_values", ()))
    d["r_values"] = tuple(d.get("r_values", ()))
    return ExperimentConfig(**d)


def record_to_json(record: ExperimentRecord) -> str:
    doc = {
        "config": _config_to_dict(record.config),
        "rows": [dataclasses.asdict(row) for row in record.rows],
        "empirical_threshold": record.empirical_threshold,
        "extra": record.extra,
    }
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def record_from_json(text: str) -> ExperimentRecord:
    doc = json.loads(text)
    return ExperimentRecord(
        config=_config_from_dict(doc["config"]),
        rows=[Row(**row) for row in doc["rows"]],
        empirical_threshold=doc.get("empirical_threshold"),
        extra=doc.get("extra", {}),
    )


CSV_COLUMNS = ("param", "value", "successes", "trials", "p_hat", "ci_low", "ci_high")


def record_to_csv(record: ExperimentRecord) -> str:
    lines = [
        "# config = " + json.dumps(_config_to_dict(record.config), sort_keys=True),
        "# empirical_threshold = " + json.dumps(record.empirical_threshold),
        "# extra = " + json.dumps(record.extra, sort_keys=True),
        ",".join(CSV_COLUMNS),
    ]
    for row in record.rows:
        vals = [row.param] + [json.dumps(getattr(row, k)) for k in CSV_COLUMNS[1:]]
        lines.append(",".join(vals))
    return "\n".join(lines) + "\n"


def record_from_csv(text: str) -> ExperimentRecord:
    config = None
    threshold = None
    extra: dict = {}
    rows = []
    header_seen = False
    for line in text.splitlines():
        if not line:
            continue
        if line.startswith("# config = "):
            config = _config_from_dict(json.loads(line[len("# config = "):]))
        elif line.startswith("# empirical_threshold = "):
            threshold = json.loads(line[len("# empirical_threshold = "):])
        elif line.startswith("# extra = "):
            extra = json.loads(line[len("# extra = "):])
        elif not header_seen:
            if line != ",".join(CSV_COLUMNS):
                raise ValueError("unexpected CSV header")
            header_seen = True
        else:
            cells = line.split(",")
            rows.append(Row(param=cells[0],
                            **{k: json.loads(v) for k, v in zip(CSV_COLUMNS[1:], cells[1:])}))
    if config is None:
        raise ValueError("CSV is missing its config line")
    return ExperimentRecord(config=config, rows=rows, empirical_threshold=threshold, extra=extra)
