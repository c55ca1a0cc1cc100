"""Column-generation set packing solver for cell instance segmentation on
superpixel graphs: exact per-anchor pricing, triple cuts, anytime bounds, a
synthetic generator, a brute-force oracle, and evaluation metrics."""

from .bounds import lagrangian_lower_bound, normalized_gap, round_upper_bound
from .engine import IterationRecord, SolveConfig, SolveReport, solve
from .generator import PlantedTruth, generate_instance
from .master import (
    MasterSolverError,
    RestrictedProblem,
    solve_restricted_ilp,
    solve_restricted_lp,
)
from .metrics import detection_metrics, match_cells, segmentation_metrics
from .model import (
    CellColumn,
    DualValues,
    FractionalSolution,
    Instance,
    Triple,
    cell_cost,
    feasible_cell,
    make_cell,
    reduced_cost,
    triple_coefficient,
    validate_packing,
)
from .oracle import OracleSizeError, enumerate_feasible_cells, oracle_solve
from .pricing import PricingResult, generate_columns, neighborhood, price_all_anchors, price_anchor
from .separation import find_violated_triples

__version__ = "0.1.0"

__all__ = [
    "CellColumn",
    "DualValues",
    "FractionalSolution",
    "Instance",
    "IterationRecord",
    "MasterSolverError",
    "OracleSizeError",
    "PlantedTruth",
    "PricingResult",
    "RestrictedProblem",
    "SolveConfig",
    "SolveReport",
    "Triple",
    "cell_cost",
    "detection_metrics",
    "enumerate_feasible_cells",
    "feasible_cell",
    "find_violated_triples",
    "generate_columns",
    "generate_instance",
    "lagrangian_lower_bound",
    "make_cell",
    "match_cells",
    "neighborhood",
    "normalized_gap",
    "oracle_solve",
    "price_all_anchors",
    "price_anchor",
    "reduced_cost",
    "round_upper_bound",
    "segmentation_metrics",
    "solve",
    "solve_restricted_ilp",
    "solve_restricted_lp",
    "triple_coefficient",
    "validate_packing",
]
