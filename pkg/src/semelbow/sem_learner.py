"""Symmetric, hollow, l1-penalized SEM fit: min_A ||X - A X||_F^2 + lam * ||A||_1.

The constraint set is handled by parametrizing A through its free strict upper
triangle (pairs i < j that are not masked), so the problem becomes an
unconstrained lasso-type problem in those coordinates. Each pair enters
``||A||_1`` twice, hence a per-coordinate penalty of ``2 * lam``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import ConvergenceError, InvalidInputError
from .matrix_core import AdjacencyMatrix, GraphSignalMatrix, normalize_pairs, spectral_norm

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 50_000
DEFAULT_EPS = 1e-9
# Stopping also requires the KKT residual to sit this far below ||X X^T||_2.
KKT_STOP_FACTOR = 1e-7


@dataclass(frozen=True)
class SemProblem:
    x: GraphSignalMatrix
    lam: float
    forbidden_mask: frozenset = frozenset()
    warm_start: Optional[AdjacencyMatrix] = None

    def __post_init__(self):
        if not self.lam >= 0:
            raise InvalidInputError(f"lambda must be >= 0, got {self.lam}")
        mask = normalize_pairs(self.forbidden_mask)
        object.__setattr__(self, "forbidden_mask", mask)
        if self.warm_start is not None:
            if self.warm_start.n_nodes != self.x.n_nodes:
                raise InvalidInputError("warm start has the wrong dimension")
            for i, j in mask:
                if self.warm_start.weights[i, j] != 0.0:
                    raise InvalidInputError("warm start violates the forbidden mask")


@dataclass(frozen=True)
class SemSolution:
    a_hat: AdjacencyMatrix
    objective: float
    fit_error: float
    residual: np.ndarray
    iterations: int
    kkt_violation: float


class _PairSpace:
    """Free coordinates of a symmetric hollow matrix with some pairs pinned to zero."""

    def __init__(self, n: int, mask: frozenset):
        rows, cols = np.triu_indices(n, 1)
        if mask:
            keep = np.array([(int(i), int(j)) not in mask for i, j in zip(rows, cols)], dtype=bool)
            rows, cols = rows[keep], cols[keep]
        self.n = n
        self.rows = rows
        self.cols = cols

    def to_matrix(self, a: np.ndarray) -> np.ndarray:
        m = np.zeros((self.n, self.n))
        m[self.rows, self.cols] = a
        m[self.cols, self.rows] = a
        return m

    def from_matrix(self, m: np.ndarray) -> np.ndarray:
        return m[self.rows, self.cols].copy()


def _fit_and_grad(a_mat: np.ndarray, gram: np.ndarray, space: _PairSpace):
    """Fit term ||X - A X||^2 via the Gram matrix, and its gradient in pair coordinates."""
    ac = a_mat @ gram
    b = gram - ac  # (I - A) C
    fit = float(np.sum(b * (np.eye(space.n) - a_mat)))
    g = -2.0 * b  # d/dA ||X - AX||^2 = 2 (A C - C)
    pair_grad = g[space.rows, space.cols] + g[space.cols, space.rows]
    return fit, pair_grad


def _fit_only(a_mat: np.ndarray, gram: np.ndarray) -> float:
    b = gram - a_mat @ gram
    return float(np.sum(b * (np.eye(gram.shape[0]) - a_mat)))


def _soft(v: np.ndarray, t: float) -> np.ndarray:
    return np.sign(v) * np.maximum(np.abs(v) - t, 0.0)


def _kkt_from_grad(a: np.ndarray, grad: np.ndarray, lam: float) -> float:
    if a.size == 0:
        return 0.0
    active = a != 0.0
    viol = np.where(
        active,
        np.abs(grad + 2.0 * lam * np.sign(a)),
        np.maximum(0.0, np.abs(grad) - 2.0 * lam),
    )
    return float(np.max(viol))


def lambda_max(x: GraphSignalMatrix, mask: Iterable[Sequence[int]] = ()) -> float:
    """Smallest lambda for which the empty graph is optimal.

    At A = 0 the pair gradient is ``-4 (X X^T)_ij`` against a per-pair penalty
    of ``2 lam``, so the threshold is ``2 max |(X X^T)_ij|`` over unmasked i < j.
    """
    return _lambda_max_gram(x.gram(), normalize_pairs(mask))


def _lambda_max_gram(gram: np.ndarray, mask: frozenset) -> float:
    space = _PairSpace(gram.shape[0], mask)
    if space.rows.size == 0:
        return 0.0
    return 2.0 * float(np.max(np.abs(gram[space.rows, space.cols])))


def check_kkt(x: GraphSignalMatrix, sol: SemSolution, lam: float) -> float:
    """Largest violation of the optimality conditions over unmasked pairs.

    With ``g_ij = (grad f)_ij + (grad f)_ji`` and ``grad f = 2(A C - C)``: active
    pairs need ``g_ij + 2 lam sign(a_ij) = 0``, zero pairs need ``|g_ij| <= 2 lam``.
    """
    a = sol.a_hat.weights
    if a.shape[0] != x.n_nodes:
        raise InvalidInputError("solution and data dimensions differ")
    gram = x.gram()
    grad = 2.0 * (a @ gram - gram)
    space = _PairSpace(x.n_nodes, sol.a_hat.forbidden_mask)
    pair_grad = grad[space.rows, space.cols] + grad[space.cols, space.rows]
    return _kkt_from_grad(a[space.rows, space.cols], pair_grad, lam)


def edge_set(a: AdjacencyMatrix, eps: float = DEFAULT_EPS) -> list[tuple[int, int, float]]:
    """Undirected edges ``(i, j, w)`` with ``i < j`` and ``|w| > eps``, sorted by ``(i, j)``."""
    if eps < 0:
        raise InvalidInputError("eps must be >= 0")
    w = a.weights
    rows, cols = np.nonzero(np.triu(np.abs(w) > eps, 1))
    return [(int(i), int(j), float(w[i, j])) for i, j in zip(rows, cols)]


def solve(
    p: SemProblem,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    gram: Optional[np.ndarray] = None,
    gram_norm: Optional[float] = None,
    trace: Optional[list] = None,
) -> SemSolution:
    """Minimize the penalized SEM objective for one lambda.

    Accelerated proximal gradient on the free pair coordinates, with
    backtracking (capped at the safe bound ``L = 4 ||X X^T||_2``) and a
    function-value restart that keeps the objective sequence non-increasing.
    Stops when the relative objective change stays below ``tol`` for two
    consecutive iterations and the KKT residual is below
    ``1e-7 * ||X X^T||_2``.

    ``gram`` and ``gram_norm`` may be passed in to share them across a path.
    If ``trace`` is a list, the objective of every accepted iterate is appended.
    """
    if tol <= 0 or max_iter < 1:
        raise InvalidInputError("need tol > 0 and max_iter >= 1")
    x = p.x
    lam = float(p.lam)
    if gram is None:
        gram = x.gram()
    if gram_norm is None:
        gram_norm = spectral_norm(gram)
    space = _PairSpace(x.n_nodes, p.forbidden_mask)

    if space.rows.size == 0 or lam >= _lambda_max_gram(gram, p.forbidden_mask):
        return _finish(x, np.zeros(space.rows.size), space, p.forbidden_mask, lam, 0)

    if p.warm_start is not None:
        a = space.from_matrix(np.asarray(p.warm_start.weights))
    else:
        a = np.zeros(space.rows.size)

    l_safe = 4.0 * gram_norm * (1.0 + 1e-9)
    step_l = l_safe / 16.0
    kkt_tol = KKT_STOP_FACTOR * gram_norm
    pen = 2.0 * lam

    def objective(v: np.ndarray) -> float:
        return _fit_only(space.to_matrix(v), gram) + pen * float(np.abs(v).sum())

    f_x = objective(a)
    if trace is not None:
        trace.append(f_x)
    y = a.copy()
    t = 1.0
    calm = 0
    kkt = math.inf
    it = 0
    for it in range(1, max_iter + 1):
        f_y, g_y = _fit_and_grad(space.to_matrix(y), gram, space)
        while True:
            z = _soft(y - g_y / step_l, pen / step_l)
            d = z - y
            f_z = _fit_only(space.to_matrix(z), gram)
            bound = f_y + float(g_y @ d) + 0.5 * step_l * float(d @ d)
            if f_z <= bound + 1e-13 * abs(f_y) or step_l >= l_safe:
                break
            step_l = min(2.0 * step_l, l_safe)
        obj_z = f_z + pen * float(np.abs(z).sum())

        if obj_z > f_x:
            # momentum overshot: restart from the last accepted point
            if t == 1.0 and np.array_equal(y, a):
                calm = 2  # a plain prox step from a cannot improve it further
            else:
                t, y = 1.0, a.copy()
                continue
        else:
            rel = abs(f_x - obj_z) / max(abs(obj_z), 1e-300)
            calm = calm + 1 if rel < tol else 0
            t_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
            y = z + ((t - 1.0) / t_next) * (z - a)
            t = t_next
            a, f_x = z, obj_z
            if trace is not None:
                trace.append(f_x)

        if calm >= 2:
            _, g_a = _fit_and_grad(space.to_matrix(a), gram, space)
            kkt = _kkt_from_grad(a, g_a, lam)
            if kkt <= kkt_tol:
                break
            calm = 0
    else:
        best = _finish(x, a, space, p.forbidden_mask, lam, it)
        raise ConvergenceError(
            f"SEM solver did not converge in {max_iter} iterations (kkt={best.kkt_violation:.3e})",
            best=best,
            kkt_violation=best.kkt_violation,
            iterations=it,
        )
    return _finish(x, a, space, p.forbidden_mask, lam, it)


def _finish(x, a, space, mask, lam, iterations) -> SemSolution:
    a_mat = space.to_matrix(a)
    adj = AdjacencyMatrix(a_mat, mask)
    residual = x.data - a_mat @ x.data
    fit = float(np.sum(residual * residual))
    sol = SemSolution(
        a_hat=adj,
        objective=fit + lam * adj.l1_norm(),
        fit_error=fit,
        residual=residual,
        iterations=iterations,
        kkt_violation=0.0,
    )
    kkt = check_kkt(x, sol, lam)
    return SemSolution(adj, sol.objective, fit, residual, iterations, kkt)
