"""Sparse SEM graph learning with interval-valued elbow selection of the sparsity level."""

__version__ = "0.1.0"

from .errors import (
    ConvergenceError,
    CurveTooShortError,
    InvalidInputError,
    MappingUnavailableError,
    ParseError,
)
from .matrix_core import (
    AdjacencyMatrix,
    GraphSignalMatrix,
    RandomSource,
    gaussian,
    spectral_norm,
    symmetrize_hollow,
)
from .sem_learner import SemProblem, SemSolution, check_kkt, edge_set, lambda_max, solve
from .lasso_solver import LassoProblem, LassoSolution, lasso_lambda_max, lasso_path, solve_lasso
from .elbow import ElbowResult, ErrorCurve, build_curve, guaed, map_to_lambda
from .sweep import (
    SCENARIOS,
    ErrorRows,
    ScenarioConfig,
    SweepRecord,
    SweepResult,
    curve_for,
    make_grid,
    sweep,
)
from .synthetic import (
    ContainmentReport,
    SyntheticScenario,
    generate,
    ground_truth_interval,
    run_containment,
)
from .ranking import RankedConnections, neighbor_subgraph, rank

__all__ = [name for name in dir() if not name.startswith("_")]
