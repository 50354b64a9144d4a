"""Plain lasso, ||y - beta X||^2 + lam ||beta||_1, by covariance-form coordinate descent.

``X`` is R x N (rows are features, columns are samples), matching the
synthetic benchmark's layout. No intercept, no standardization, no 1/N factor.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import ConvergenceError, InvalidInputError

DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 100_000


@dataclass(frozen=True)
class LassoProblem:
    x: np.ndarray
    y: np.ndarray
    lam: float

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float).ravel()
        if x.ndim != 2 or x.shape[1] != y.shape[0]:
            raise InvalidInputError(f"x must be R x N with N = len(y); got {x.shape} and {y.shape}")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise InvalidInputError("lasso data contains non-finite entries")
        if not self.lam >= 0:
            raise InvalidInputError(f"lambda must be >= 0, got {self.lam}")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)


@dataclass(frozen=True)
class LassoSolution:
    beta: np.ndarray
    mse: float
    support: frozenset
    lam: float
    objective: float
    sweeps: int


def lasso_lambda_max(x, y) -> float:
    """Smallest lambda with beta = 0 optimal: ``2 max_r |(X y)_r|``."""
    return 2.0 * float(np.max(np.abs(np.asarray(x) @ np.asarray(y))))


def _make_solution(x, y, beta, lam, sweeps) -> LassoSolution:
    r = y - beta @ x
    mse = float(r @ r)
    return LassoSolution(
        beta=beta,
        mse=mse,
        support=frozenset(int(k) for k in np.flatnonzero(beta)),
        lam=float(lam),
        objective=mse + lam * float(np.abs(beta).sum()),
        sweeps=sweeps,
    )


def _cd(q, qy, yy, lam, beta, tol, max_iter):
    """Coordinate descent on the covariance form; updates ``beta`` in place.

    Alternates full sweeps with sweeps over the current active set until a full
    sweep moves no coordinate by more than ``tol`` (scaled by ||y||).
    """
    r_dim = q.shape[0]
    diag = np.diag(q).copy()
    qb = q @ beta
    half = 0.5 * lam
    scale = tol * max(np.sqrt(yy), 1e-300)
    sweeps = 0

    def one_sweep(idx):
        biggest = 0.0
        for k in idx:
            if diag[k] == 0.0:
                continue
            old = beta[k]
            rho = qy[k] - qb[k] + diag[k] * old
            if rho > half:
                new = (rho - half) / diag[k]
            elif rho < -half:
                new = (rho + half) / diag[k]
            else:
                new = 0.0
            if new != old:
                delta = new - old
                beta[k] = new
                qb[:] += delta * q[:, k]
                step = abs(delta) * np.sqrt(diag[k])
                if step > biggest:
                    biggest = step
        return biggest

    full = range(r_dim)
    while sweeps < max_iter:
        sweeps += 1
        if one_sweep(full) <= scale:
            return sweeps
        while sweeps < max_iter:
            active = np.flatnonzero(beta)
            sweeps += 1
            if one_sweep(active) <= scale:
                break
    raise ConvergenceError(f"lasso coordinate descent did not converge in {max_iter} sweeps")


def solve_lasso(
    p: LassoProblem,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    warm: Optional[np.ndarray] = None,
    gram: Optional[tuple] = None,
) -> LassoSolution:
    """Global minimizer of the lasso objective; inactive coefficients are exact zeros."""
    if tol <= 0 or max_iter < 1:
        raise InvalidInputError("need tol > 0 and max_iter >= 1")
    if gram is None:
        gram = (p.x @ p.x.T, p.x @ p.y, float(p.y @ p.y))
    q, qy, yy = gram
    beta = np.zeros(p.x.shape[0]) if warm is None else np.array(warm, dtype=float)
    try:
        sweeps = _cd(q, qy, yy, float(p.lam), beta, tol, max_iter)
    except ConvergenceError as exc:
        best = _make_solution(p.x, p.y, beta, p.lam, max_iter)
        raise ConvergenceError(str(exc), best=best) from None
    return _make_solution(p.x, p.y, beta, p.lam, sweeps)


def lasso_path(
    x,
    y,
    grid: Sequence[float],
    warm: bool = True,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> list[LassoSolution]:
    """Solve on every grid point, in grid order, optionally warm-starting each from the last."""
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise InvalidInputError("grid must be a non-empty sequence")
    steps = np.diff(grid)
    if grid.size > 1 and not (np.all(steps > 0) or np.all(steps < 0)):
        raise InvalidInputError("grid must be strictly monotone")
    first = LassoProblem(x, y, float(grid[0]))
    x, y = first.x, first.y
    gram = (x @ x.T, x @ y, float(y @ y))
    out = []
    prev = None
    for lam in grid:
        sol = solve_lasso(
            LassoProblem(x, y, float(lam)), tol, max_iter, warm=prev if warm else None, gram=gram
        )
        out.append(sol)
        prev = sol.beta
    return out
