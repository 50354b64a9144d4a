"""Regularization path of the SEM learner and the error curves derived from it."""

from __future__ import annotations

import enum
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from . import sem_learner
from .elbow import ErrorCurve, build_curve
from .errors import ConvergenceError, InvalidInputError
from .matrix_core import AdjacencyMatrix, GraphSignalMatrix, spectral_norm

log = logging.getLogger(__name__)

THREADS_ENV = "SEMELBOW_THREADS"


class ErrorRows(str, enum.Enum):
    ALL = "all"
    OUTPUTS = "outputs"


@dataclass(frozen=True)
class ScenarioConfig:
    allow_output_interlink: bool = True
    error_rows: ErrorRows = ErrorRows.ALL

    def mask(self, x: GraphSignalMatrix) -> frozenset:
        return frozenset() if self.allow_output_interlink else x.output_pair()


# The four (interlink, error rows) combinations, numbered 1-4.
SCENARIOS = {
    1: ScenarioConfig(True, ErrorRows.ALL),
    2: ScenarioConfig(False, ErrorRows.ALL),
    3: ScenarioConfig(True, ErrorRows.OUTPUTS),
    4: ScenarioConfig(False, ErrorRows.OUTPUTS),
}


@dataclass(frozen=True)
class SweepRecord:
    lam: float
    link_count: int
    nmse_all: float
    nmse_outputs: float
    kkt_violation: float
    iterations: int
    failed: bool = False
    solution: Optional[AdjacencyMatrix] = None


@dataclass(frozen=True)
class SweepResult:
    records: tuple[SweepRecord, ...]
    grid_spec: dict
    mask_used: frozenset = frozenset()

    @property
    def lambdas(self) -> np.ndarray:
        return np.array([r.lam for r in self.records])


def make_grid(lambda_max: float, points: int = 200, min_ratio: float = 1e-3) -> np.ndarray:
    """Geometric grid from ``lambda_max`` down to ``lambda_max * min_ratio``, then 0.

    ``points == 1`` yields the single value ``lambda_max`` (no zero appended).
    """
    if points < 1 or not (0 < min_ratio < 1) or not lambda_max > 0:
        raise InvalidInputError(
            f"invalid grid: lambda_max={lambda_max}, points={points}, min_ratio={min_ratio}"
        )
    if points == 1:
        return np.array([float(lambda_max)])
    geo = np.geomspace(lambda_max, lambda_max * min_ratio, int(points))
    return np.append(geo, 0.0)


def _nmse(residual: np.ndarray, data: np.ndarray, rows: Optional[list[int]] = None) -> float:
    if rows is not None:
        residual, data = residual[rows], data[rows]
    den = float(np.sum(data * data))
    return float(np.sum(residual * residual)) / den if den > 0 else 0.0


def _thread_count() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def sweep(
    x: GraphSignalMatrix,
    sc: ScenarioConfig,
    grid: Sequence[float],
    warm: bool = True,
    tol: float = sem_learner.DEFAULT_TOL,
    max_iter: int = sem_learner.DEFAULT_MAX_ITER,
    eps: float = sem_learner.DEFAULT_EPS,
    keep_solutions: bool = False,
    workers: Optional[int] = None,
) -> SweepResult:
    """Solve the SEM problem along a strictly decreasing lambda grid.

    The fit always covers every row; ``sc.error_rows`` only matters when the
    curve is extracted (see :func:`curve_for`), so one sweep per mask serves
    two scenarios. Solver failures are recorded per grid point.
    """
    grid = [float(g) for g in grid]
    if not grid:
        raise InvalidInputError("empty lambda grid")
    if any(b >= a for a, b in zip(grid, grid[1:])):
        raise InvalidInputError("lambda grid must be strictly decreasing")
    mask = sc.mask(x)
    gram = x.gram()
    gram_norm = spectral_norm(gram)
    outputs = sorted(x.output_nodes) or None

    def run(lam: float, start: Optional[AdjacencyMatrix]) -> tuple[SweepRecord, AdjacencyMatrix]:
        problem = sem_learner.SemProblem(x, lam, mask, start)
        failed = False
        try:
            sol = sem_learner.solve(problem, tol, max_iter, gram=gram, gram_norm=gram_norm)
        except ConvergenceError as exc:
            log.warning("sweep: lambda=%g did not converge: %s", lam, exc)
            sol, failed = exc.best, True
        rec = SweepRecord(
            lam=lam,
            link_count=len(sem_learner.edge_set(sol.a_hat, eps)),
            nmse_all=_nmse(sol.residual, x.data),
            nmse_outputs=_nmse(sol.residual, x.data, outputs) if outputs else float("nan"),
            kkt_violation=sol.kkt_violation,
            iterations=sol.iterations,
            failed=failed,
            solution=sol.a_hat if keep_solutions else None,
        )
        return rec, sol.a_hat

    records = []
    if warm:
        prev = None
        for lam in grid:
            rec, prev = run(lam, prev)
            records.append(rec)
    else:
        n_workers = workers or _thread_count()
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            records = [r for r, _ in pool.map(lambda lam: run(lam, None), grid)]

    spec = {"points": len(grid), "lambda_first": grid[0], "lambda_last": grid[-1], "warm": warm}
    return SweepResult(tuple(records), spec, mask)


def curve_for(sr: SweepResult, sc: ScenarioConfig) -> ErrorCurve:
    """Error curve with z = link count and v = the N-MSE selected by ``sc.error_rows``."""
    return build_curve(curve_samples(sr, sc))


def curve_samples(sr: SweepResult, sc: ScenarioConfig) -> list[tuple[float, float, float]]:
    if not sr.records:
        raise InvalidInputError("empty sweep")
    col = "nmse_all" if ErrorRows(sc.error_rows) is ErrorRows.ALL else "nmse_outputs"
    return [
        (float(r.link_count), getattr(r, col), r.lam) for r in sr.records if not r.failed
    ]


def scenario_pairs() -> Iterable[tuple[bool, tuple[int, int]]]:
    """(interlink allowed, (all-rows scenario, outputs-only scenario)) for the two sweeps."""
    return ((True, (1, 3)), (False, (2, 4)))
