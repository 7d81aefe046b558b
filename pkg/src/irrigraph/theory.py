"""Closed forms for every constant and threshold in the model, plus an
empirical checker for the point-regularity event.

All unsubscripted logs are natural; base 2 appears only inside f (and the
exploration depth derived from it). The connection-count threshold at the
connectivity radius is cstar(n) = sqrt(2 ln n / ln ln n); below it the graph
is disconnected whp, and a constant budget suffices once the radius grows
polynomially (delta > 0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .geometry import PointSet, ball_volume, grid_for_radius
from .rgg import build_index

__all__ = [
    "TheoryParams",
    "BudgetPlan",
    "RegularityReport",
    "penrose_radius",
    "cstar",
    "f_of",
    "budget_plan",
    "lower_bound_c",
    "radius_from_delta",
    "check_regularity",
]


@dataclass(frozen=True)
class TheoryParams:
    """Fixed parameters of a protocol instance: radius exponent delta,
    regularity slack eps, dimension, radius prefactor gamma, and n."""

    delta: float
    eps: float
    d: int
    gamma: float = 1.0
    n: int = 0

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie strictly inside (0,1)")
        if not 0.0 < self.eps < 1.0:
            raise ValueError("eps must lie strictly inside (0,1)")
        if self.d < 1:
            raise ValueError("d must be >= 1")
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")


@dataclass(frozen=True)
class BudgetPlan:
    """Stage budgets (k1, k2, k3, 1) and the derived density constants."""

    k1: int
    k2: int
    k3: int
    c_total: int
    alpha_d: float
    p_d: float

    @property
    def budgets(self) -> tuple[int, int, int, int]:
        return (self.k1, self.k2, self.k3, 1)

    @property
    def eta_d(self) -> float:
        """Per-cell failure exponent of the propagation phase (diagnostic):
        alpha_d^3 / (12 k3 (1+eps)^2 v_d^2) = alpha_d * p_d^2 / (12 k3)."""
        return self.alpha_d * self.p_d**2 / (12.0 * self.k3)


def penrose_radius(n: int, d: int) -> float:
    """Connectivity threshold scale (ln n / (n v_d))^(1/d) of the
    unsparsified geometric graph."""
    if n < 3:
        raise ValueError("n must be >= 3")
    if d < 1:
        raise ValueError("d must be >= 1")
    return (math.log(n) / (n * ball_volume(d))) ** (1.0 / d)


def cstar(n: int) -> float:
    """sqrt(2 ln n / ln ln n), the budget threshold at the connectivity
    radius."""
    if n < 3 or math.log(math.log(n)) <= 0:
        raise ValueError("n too small: ln ln n must be positive")
    return math.sqrt(2.0 * math.log(n) / math.log(math.log(n)))


def f_of(x: float, eps: float) -> int:
    """ceil(sqrt((1 + x^2 + 8 sqrt(x) + eps) / (x - 2 x^2 log2(1/x)))).

    Defined for x in (0,1) where the denominator is positive (it vanishes
    at x = 1/2 and is negative beyond).
    """
    if not 0.0 < x < 1.0:
        raise ValueError("x must lie in (0,1)")
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0,1)")
    den = x - 2.0 * x * x * math.log2(1.0 / x)
    if den <= 0.0:
        raise ValueError(f"f undefined at x={x}: denominator {den} <= 0")
    num = 1.0 + x * x + 8.0 * math.sqrt(x) + eps
    return int(math.ceil(math.sqrt(num / den)))


def budget_plan(p: TheoryParams) -> BudgetPlan:
    """Stage budgets sufficient for whp connectivity at radius exponent
    delta: k1 from f (capped at the 1/5 regime), k2 and k3 from the doubling
    and propagation counts."""
    d, eps, delta = p.d, p.eps, p.delta
    vd = ball_volume(d)
    two_sqrt_d_pow = (2.0 * math.sqrt(d)) ** d
    alpha_d = (1.0 - eps) / (2.0 * two_sqrt_d_pow)
    k1 = f_of(delta, eps) if delta < 0.2 else f_of(0.2, eps)
    k2 = int(math.ceil(8.0 * (1.0 + eps) * vd * two_sqrt_d_pow / (1.0 - eps)))
    k3 = int(math.ceil(math.sqrt(4.0 * (1.0 + eps) * vd / alpha_d)))
    p_d = alpha_d / ((1.0 + eps) * vd)
    return BudgetPlan(
        k1=k1,
        k2=k2,
        k3=k3,
        c_total=k1 + k2 + k3 + 1,
        alpha_d=alpha_d,
        p_d=p_d,
    )


def lower_bound_c(n: int, r: float, d: int, eps: float, lam: float | None = None) -> float:
    """Largest budget that still leaves the graph disconnected whp:
    sqrt((1-eps) * (lam/(lam-1/2)) * ln n / ln(n r^d)).

    By default lam is estimated at finite n as ln(n r^d)/ln ln n; pass
    lam=math.inf for the limiting regime (factor 1). Returns NaN when the
    estimated lam is <= 1/2 (the display does not apply there).
    """
    nrd = n * r**d
    if nrd <= 1.0:
        raise ValueError("need n r^d > 1")
    log_ratio = math.log(n) / math.log(nrd)
    if lam is None:
        lam = math.log(nrd) / math.log(math.log(n))
    if lam <= 0.5:
        return math.nan
    factor = 1.0 if math.isinf(lam) else lam / (lam - 0.5)
    return math.sqrt((1.0 - eps) * factor * log_ratio)


def radius_from_delta(n: int, d: int, delta: float, gamma: float = 1.0) -> float:
    """Visibility radius gamma * n^(-(1-delta)/d); not clipped to the torus
    diameter (callers wanting the complete-graph regime may clip)."""
    return gamma * n ** (-(1.0 - delta) / d)


@dataclass(frozen=True)
class RegularityReport:
    """Extremes of the ball- and cube-count ratios over a finite center set.

    The underlying event is a supremum over all centers; this report
    discretizes it to the n data points plus all grid-cell centers, so
    `holds` is a (slightly optimistic) finite approximation.
    """

    eps: float
    ball_ratio_min: float
    ball_ratio_max: float
    cube_ratio_min: float
    cube_ratio_max: float
    holds: bool
    centers_checked: int
    ball_ratio_mean: float = math.nan
    cube_ratio_mean: float = math.nan
    discretized: bool = True


def _cell_centers(m: int, d: int) -> np.ndarray:
    grids = np.meshgrid(*([np.arange(m)] * d), indexing="ij")
    return (np.stack(grids, axis=-1).reshape(-1, d) + 0.5) / m


def check_regularity(points: PointSet, r: float, eps: float) -> RegularityReport:
    """Evaluate the two count-ratio families at all data points and all
    grid-cell centers.

    Ball counts use the open ball (distance < r) against expectation
    n * v_d * r^d; cube counts use the closed cube of side r/(2 sqrt(d))
    against n * side^d. holds is true iff all four extremes lie strictly
    inside (1-eps, 1+eps).
    """
    d = points.dim
    if not 0.0 < r <= math.sqrt(d) / 2.0:
        raise ValueError("need 0 < r <= sqrt(d)/2")
    index = build_index(points, r)
    grid = grid_for_radius(r, d)
    centers = np.vstack([points.points, _cell_centers(grid.cells_per_side, d)])
    n = points.n
    ball_counts = _kernels.count_in_balls_kernel(
        points.points,
        index.member_ids,
        index.bucket_starts,
        index.buckets_per_side,
        centers,
        r,
        True,
        index.workspace_size,
    )
    side = r / (2.0 * math.sqrt(d))
    cube_counts = _kernels.count_in_cubes_kernel(
        points.points,
        index.member_ids,
        index.bucket_starts,
        index.buckets_per_side,
        centers,
        side / 2.0,
        index.workspace_size,
    )
    ball_ratios = ball_counts / (n * ball_volume(d) * r**d)
    cube_ratios = cube_counts / (n * side**d)
    bmin, bmax = float(ball_ratios.min()), float(ball_ratios.max())
    cmin, cmax = float(cube_ratios.min()), float(cube_ratios.max())
    holds = (1.0 - eps) < bmin and bmax < (1.0 + eps) and (1.0 - eps) < cmin and cmax < (1.0 + eps)
    return RegularityReport(
        eps=float(eps),
        ball_ratio_min=bmin,
        ball_ratio_max=bmax,
        cube_ratio_min=cmin,
        cube_ratio_max=cmax,
        holds=holds,
        centers_checked=len(centers),
        ball_ratio_mean=float(ball_ratios.mean()),
        cube_ratio_mean=float(cube_ratios.mean()),
    )
