"""Synthetic lasso benchmark: does the elbow interval land inside the exact-recovery lambda range?

Each run draws ``x_{r,n} ~ N(0, input_variance)``, ``y = beta_true x + eps``,
solves the lasso on a geometric lambda grid, and compares the elbow interval
(mapped back to lambda) against the range of grid lambdas whose lasso support
equals the true support.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .elbow import build_curve, guaed, map_to_lambda
from .errors import InvalidInputError
from .lasso_solver import LassoSolution, lasso_lambda_max, lasso_path
from .matrix_core import RandomSource, gaussian

log = logging.getLogger(__name__)

# lambda_gap: z = lambda_top - lambda; log_inv_lambda: z = log(lambda_top / lambda);
# support: z = |support|, which collapses every exact-recovery lambda onto one z value.
Z_AXES = ("lambda_gap", "log_inv_lambda", "support")


def beta_for(name: str, r: int = 30) -> np.ndarray:
    """S1: 20 ones then zeros; S2: 10 ones then zeros."""
    ones = {"s1": 20, "s2": 10}.get(name.lower())
    if ones is None:
        raise InvalidInputError(f"unknown scenario {name!r}; expected s1 or s2")
    return np.r_[np.ones(ones), np.zeros(r - ones)]


@dataclass(frozen=True)
class SyntheticScenario:
    beta_true: np.ndarray
    r: int = 30
    n: int = 200
    noise_variance: float = 1.0
    input_variance: float = 100.0
    runs: int = 100
    seed: int = 0
    grid_points: int = 300
    grid_top: float = 1.05
    grid_floor: float = 1e-4
    z_axis: str = "lambda_gap"

    def __post_init__(self):
        beta = np.asarray(self.beta_true, dtype=float).ravel()
        if beta.size != self.r:
            raise InvalidInputError(f"beta_true has {beta.size} entries, expected r={self.r}")
        if self.n < 1 or self.runs < 0 or self.grid_points < 3:
            raise InvalidInputError("need n >= 1, runs >= 0 and grid_points >= 3")
        if self.noise_variance < 0 or self.input_variance < 0:
            raise InvalidInputError("variances must be >= 0")
        if self.z_axis not in Z_AXES:
            raise InvalidInputError(f"z_axis must be one of {Z_AXES}")
        object.__setattr__(self, "beta_true", beta)

    @classmethod
    def named(cls, name: str, **kw) -> "SyntheticScenario":
        r = kw.pop("r", 30)
        return cls(beta_for(name, r), r=r, **kw)

    @property
    def true_support(self) -> frozenset:
        return frozenset(int(k) for k in np.flatnonzero(self.beta_true))

    def config_dict(self) -> dict:
        return {
            "beta_true": [float(b) for b in self.beta_true],
            "r": self.r,
            "n": self.n,
            "noise_variance": self.noise_variance,
            "input_variance": self.input_variance,
            "runs": self.runs,
            "seed": self.seed,
            "grid_points": self.grid_points,
            "grid_top": self.grid_top,
            "grid_floor": self.grid_floor,
            "z_axis": self.z_axis,
        }


class GroundTruth(NamedTuple):
    lo: float
    hi: float
    contiguous: bool


@dataclass(frozen=True)
class RunRecord:
    run: int
    seed: int
    lambda_max: float
    truth: Optional[GroundTruth]
    detected: tuple[float, float]  # (lambda at k1, lambda at k2): large, small
    point_lambda: float
    k1: float
    k2: float
    contained: Optional[bool]
    overshoot: float  # share of the detected log-lambda span outside the truth
    overshoot_side: str  # "", "low", "high" or "both"


@dataclass
class ContainmentReport:
    scenario: dict
    runs: list[RunRecord] = field(default_factory=list)

    @property
    def evaluated(self) -> int:
        return sum(r.truth is not None for r in self.runs)

    @property
    def contained(self) -> int:
        return sum(bool(r.contained) for r in self.runs)

    @property
    def absent(self) -> int:
        return sum(r.truth is None for r in self.runs)

    def violations(self) -> list[RunRecord]:
        return [r for r in self.runs if r.contained is False]

    def summary(self) -> dict:
        bad = self.violations()
        return {
            "runs": len(self.runs),
            "evaluated": self.evaluated,
            "ground_truth_absent": self.absent,
            "contained": self.contained,
            "containment_rate": self.contained / self.evaluated if self.evaluated else None,
            "violations": len(bad),
            "violations_low_end_only": sum(r.overshoot_side == "low" for r in bad),
            "mean_overshoot": float(np.mean([r.overshoot for r in bad])) if bad else 0.0,
            "non_contiguous_truth": sum(
                r.truth is not None and not r.truth.contiguous for r in self.runs
            ),
        }


def generate(sc: SyntheticScenario, run_index: int) -> tuple[np.ndarray, np.ndarray]:
    """Draw ``(x, y)`` for one run; deterministic in ``(sc.seed, run_index)``."""
    rs = RandomSource(sc.seed).spawn(run_index)
    x = gaussian(rs, 0.0, sc.input_variance, sc.r * sc.n).reshape(sc.r, sc.n)
    noise = gaussian(rs, 0.0, sc.noise_variance, sc.n)
    return x, sc.beta_true @ x + noise


def _truth_from_path(grid: np.ndarray, path: Sequence[LassoSolution], support) -> Optional[GroundTruth]:
    """grid ascending; exact-recovery block containing the largest recovering lambda."""
    hits = [sol.support == support for sol in path]
    if not any(hits):
        return None
    top = max(k for k, h in enumerate(hits) if h)
    lo = top
    while lo > 0 and hits[lo - 1]:
        lo -= 1
    contiguous = sum(hits) == top - lo + 1
    if not contiguous:
        log.info("exact support recovery is not contiguous on the grid; using the top block")
    return GroundTruth(float(grid[lo]), float(grid[top]), contiguous)


def ground_truth_interval(x, y, grid: Sequence[float], true_support) -> Optional[GroundTruth]:
    """Smallest and largest grid lambda whose lasso support equals ``true_support`` exactly."""
    grid = np.asarray(grid, dtype=float)
    if grid.size > 1 and not np.all(np.diff(grid) > 0):
        raise InvalidInputError("ground-truth grid must be strictly increasing")
    path = lasso_path(x, y, grid[::-1], warm=True)[::-1]
    return _truth_from_path(grid, path, frozenset(true_support))


def lambda_grid(sc: SyntheticScenario, lam_max: float) -> np.ndarray:
    """Decreasing geometric grid from ``grid_top * lam_max`` to ``grid_floor * lam_max``."""
    return np.geomspace(sc.grid_top * lam_max, sc.grid_floor * lam_max, sc.grid_points)


def curve_samples(grid_desc: np.ndarray, path: Sequence[LassoSolution], z_axis: str):
    """``(z, mse, lambda)`` samples of the lasso error curve; z grows as lambda shrinks."""
    if z_axis == "support":
        zs = [float(len(s.support)) for s in path]
    elif z_axis == "log_inv_lambda":
        zs = [math.log(grid_desc[0] / lam) for lam in grid_desc]
    else:
        zs = [float(grid_desc[0] - lam) for lam in grid_desc]
    return [(z, s.mse, float(lam)) for z, s, lam in zip(zs, path, grid_desc)]


def _overshoot(detected: tuple[float, float], truth: GroundTruth) -> tuple[float, str]:
    hi, lo = detected
    span = math.log(hi / lo) if hi > lo else 0.0
    below = max(0.0, math.log(truth.lo / lo)) if lo < truth.lo else 0.0
    above = max(0.0, math.log(hi / truth.hi)) if hi > truth.hi else 0.0
    side = {(False, False): "", (True, False): "low", (False, True): "high", (True, True): "both"}[
        (below > 0, above > 0)
    ]
    frac = (below + above) / span if span > 0 else float(below + above > 0)
    return min(frac, 1.0), side


def run_one(sc: SyntheticScenario, run_index: int) -> RunRecord:
    x, y = generate(sc, run_index)
    lam_max = lasso_lambda_max(x, y)
    grid = lambda_grid(sc, lam_max)
    path = lasso_path(x, y, grid, warm=True)
    truth = _truth_from_path(grid[::-1], path[::-1], sc.true_support)

    curve = build_curve(curve_samples(grid, path, sc.z_axis))
    res = map_to_lambda(curve, guaed(curve))
    detected = res.lambda_interval
    contained, overshoot, side = None, 0.0, ""
    if truth is not None:
        hi, lo = detected
        contained = truth.lo <= lo and hi <= truth.hi
        if not contained:
            overshoot, side = _overshoot(detected, truth)
    return RunRecord(
        run=run_index,
        seed=RandomSource(sc.seed).spawn(run_index).seed,
        lambda_max=lam_max,
        truth=truth,
        detected=detected,
        point_lambda=res.lambda_point,
        k1=res.k1_star,
        k2=res.k2_star,
        contained=contained,
        overshoot=overshoot,
        overshoot_side=side,
    )


def run_containment(sc: SyntheticScenario, workers: int = 1) -> ContainmentReport:
    """All runs of a scenario; runs are independent, so ``workers > 1`` gives the same report."""
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(run_one, [sc] * sc.runs, range(sc.runs)))
    else:
        runs = [run_one(sc, k) for k in range(sc.runs)]
    return ContainmentReport(sc.config_dict(), runs)
