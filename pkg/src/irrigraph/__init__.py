"""irrigraph: a simulation lab for locally sparsified random geometric
graphs (irrigation / Bluetooth graphs) on the unit torus.

Build the geometric graph with a bucket-grid index, sample c-out choice
lists with staged budgets, analyze connectivity and its obstructions, run
the four-phase constructive connectivity protocol, and estimate thresholds
by Monte Carlo.
"""

from .geometry import (
    CellId,
    Grid,
    PointSet,
    ball_volume,
    cell_of,
    grid_for_radius,
    sample_points,
    snake_order,
    torus_distance,
)
from .rgg import NeighborIndex, build_index, degree_stats, neighbors_of
from .irrigation import IrrigationGraph, StageView, out_neighbors, sample_irrigation, undirected_edges
from .graph_analysis import (
    CliqueReport,
    ComponentLabeling,
    UnionFind,
    components,
    find_isolated_cliques,
    is_connected,
)
from .theory import (
    BudgetPlan,
    RegularityReport,
    TheoryParams,
    budget_plan,
    check_regularity,
    cstar,
    f_of,
    lower_bound_c,
    penrose_radius,
    radius_from_delta,
)
from .constructive import (
    Phase1Report,
    Phase2Report,
    Phase3Report,
    ProtocolReport,
    phase1_explore,
    phase2_densify,
    phase3_propagate,
    run_protocol,
    stitch,
)
from .harness import (
    ExperimentConfig,
    ExperimentRecord,
    clique_scan,
    estimate_connectivity,
    protocol_batch,
    regularity_audit,
    sweep_c,
    sweep_r,
    wilson_interval,
)

__version__ = "0.1.0"
