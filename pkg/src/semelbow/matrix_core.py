"""Dense matrix primitives, the graph-signal / adjacency containers and seeded sampling."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import InvalidInputError

Pair = tuple[int, int]


def normalize_pairs(pairs: Optional[Iterable[Sequence[int]]]) -> frozenset[Pair]:
    """Return ``pairs`` as a frozenset of ordered ``(i, j)`` tuples with ``i < j``."""
    out = set()
    for p in pairs or ():
        i, j = (int(p[0]), int(p[1]))
        if i == j:
            raise InvalidInputError(f"forbidden pair ({i}, {j}) is a self-loop")
        out.add((min(i, j), max(i, j)))
    return frozenset(out)


def _require_finite(m: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(m)):
        raise InvalidInputError(f"{what} contains non-finite entries")


@dataclass(frozen=True)
class GraphSignalMatrix:
    """N x M observations: one row per variable (graph node), one column per sample.

    ``output_nodes`` marks the rows treated as outputs (arousal/valence in the
    soundscape use case). ``transform`` holds per-row ``(mean, std)`` when the
    loader z-scored the data.
    """

    data: np.ndarray
    node_names: tuple[str, ...] = ()
    output_nodes: frozenset[int] = frozenset()
    transform: Optional[tuple[tuple[float, float], ...]] = None

    def __post_init__(self):
        data = np.array(self.data, dtype=float)
        if data.ndim != 2:
            raise InvalidInputError("data must be a 2-D matrix")
        n, m = data.shape
        if n < 2 or m < 1:
            raise InvalidInputError(f"need N >= 2 and M >= 1, got {n}x{m}")
        _require_finite(data, "data")
        data.setflags(write=False)
        names = tuple(self.node_names) if self.node_names else tuple(f"x{i + 1}" for i in range(n))
        if len(names) != n:
            raise InvalidInputError(f"{len(names)} node names for {n} nodes")
        outputs = frozenset(int(k) for k in self.output_nodes)
        if any(k < 0 or k >= n for k in outputs):
            raise InvalidInputError(f"output node index out of range 0..{n - 1}")
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "node_names", names)
        object.__setattr__(self, "output_nodes", outputs)

    @property
    def n_nodes(self) -> int:
        return self.data.shape[0]

    @property
    def n_obs(self) -> int:
        return self.data.shape[1]

    def gram(self) -> np.ndarray:
        """``X X^T``, the only statistic the SEM fit term depends on."""
        return self.data @ self.data.T

    def output_pair(self) -> frozenset[Pair]:
        """Mask forbidding the edge between the two designated outputs."""
        if len(self.output_nodes) != 2:
            raise InvalidInputError(
                f"the output inter-link needs exactly 2 outputs, got {len(self.output_nodes)}"
            )
        return normalize_pairs([sorted(self.output_nodes)])


@dataclass(frozen=True)
class AdjacencyMatrix:
    """Symmetric, hollow N x N weights with an optional set of pairs pinned to zero.

    Construction validates the invariants exactly; use :func:`symmetrize_hollow`
    to project an arbitrary matrix onto the valid set.
    """

    weights: np.ndarray
    forbidden_mask: frozenset[Pair] = field(default_factory=frozenset)

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise InvalidInputError("adjacency weights must be square")
        _require_finite(w, "adjacency weights")
        mask = normalize_pairs(self.forbidden_mask)
        if np.any(np.diag(w) != 0.0):
            raise InvalidInputError("adjacency matrix must have a zero diagonal")
        if not np.array_equal(w, w.T):
            raise InvalidInputError("adjacency matrix must be exactly symmetric")
        for i, j in mask:
            if i >= w.shape[0] or j >= w.shape[0]:
                raise InvalidInputError(f"masked pair ({i}, {j}) out of range")
            if w[i, j] != 0.0:
                raise InvalidInputError(f"masked pair ({i}, {j}) has nonzero weight")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "forbidden_mask", mask)

    @property
    def n_nodes(self) -> int:
        return self.weights.shape[0]

    @classmethod
    def zeros(cls, n: int, mask: Iterable[Sequence[int]] = ()) -> "AdjacencyMatrix":
        return cls(np.zeros((n, n)), normalize_pairs(mask))

    def l1_norm(self) -> float:
        """Sum of |a_ij| over all entries (each undirected edge counted twice)."""
        return float(np.abs(self.weights).sum())


def symmetrize_hollow(m, mask: Iterable[Sequence[int]] = ()) -> AdjacencyMatrix:
    """Project ``m`` onto symmetric hollow matrices: ``(m + m^T)/2``, zero diagonal and masked pairs."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidInputError("matrix must be square")
    _require_finite(m, "matrix")
    pairs = normalize_pairs(mask)
    w = 0.5 * (m + m.T)
    np.fill_diagonal(w, 0.0)
    for i, j in pairs:
        w[i, j] = w[j, i] = 0.0
    # (m + m^T)/2 is symmetric in exact arithmetic; copy the upper triangle to make it bitwise so.
    w = np.triu(w) + np.triu(w, 1).T
    return AdjacencyMatrix(w, pairs)


def spectral_norm(m, tol: float = 1e-10, max_iter: int = 10_000) -> float:
    """Largest singular value of ``m`` by power iteration on ``m^T m``.

    Starts from the normalized all-ones vector. If the result falls below the
    largest column norm (a hard lower bound on sigma_max), the start vector was
    (numerically) orthogonal to the leading singular vector and the iteration
    is rerun from a fixed-seed random vector.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2:
        raise InvalidInputError("spectral_norm expects a matrix")
    _require_finite(m, "matrix")
    if tol <= 0:
        raise InvalidInputError("tol must be positive")
    if m.size == 0 or not np.any(m):
        return 0.0
    col_bound = float(np.max(np.linalg.norm(m, axis=0)))

    v0 = np.ones(m.shape[1]) / math.sqrt(m.shape[1])
    sigma = _power_iteration(m, v0, tol, max_iter)
    if sigma < col_bound * (1.0 - 1e-12):
        v0 = np.random.default_rng(0).standard_normal(m.shape[1])
        sigma = max(_power_iteration(m, v0 / np.linalg.norm(v0), tol, max_iter), col_bound)
    return sigma


def _power_iteration(m: np.ndarray, v: np.ndarray, tol: float, max_iter: int) -> float:
    mtm = m.T @ m
    sq = 0.0
    for _ in range(max_iter):
        w = mtm @ v
        norm = float(np.linalg.norm(w))
        if norm == 0.0:
            return 0.0
        v = w / norm
        # Rayleigh quotient of m^T m converges twice as fast as the iterate itself.
        new_sq = float(v @ (mtm @ v))
        if abs(new_sq - sq) <= tol * abs(new_sq):
            return math.sqrt(max(new_sq, 0.0))
        sq = new_sq
    return math.sqrt(max(sq, 0.0))


class RandomSource:
    """Seeded Gaussian source: PCG64 uniforms fed through the Box-Muller transform.

    The uniform stream is numpy's ``Generator(PCG64(seed)).random()``, whose
    output sequence numpy keeps stable across releases. Each pair of uniforms
    ``(u1, u2)`` yields ``sqrt(-2 ln(1 - u1)) * (cos 2 pi u2, sin 2 pi u2)``.
    Instances are single-owner; use :meth:`spawn` to derive per-worker sources.
    """

    def __init__(self, seed: int):
        self.seed = int(seed) & 0xFFFF_FFFF_FFFF_FFFF
        self._gen = np.random.Generator(np.random.PCG64(self.seed))

    def spawn(self, index: int) -> "RandomSource":
        """Child source for worker/run ``index``; depends only on ``(seed, index)``.

        The child seed is the first 64-bit word of ``SeedSequence([seed, index])``.
        """
        state = np.random.SeedSequence([self.seed, int(index)]).generate_state(1, np.uint64)
        return RandomSource(int(state[0]))

    def uniform(self, n: int) -> np.ndarray:
        return self._gen.random(n)

    def standard_normal(self, n: int) -> np.ndarray:
        n = int(n)
        if n < 0:
            raise InvalidInputError("sample count must be non-negative")
        pairs = (n + 1) // 2
        u = self._gen.random(2 * pairs)
        radius = np.sqrt(-2.0 * np.log1p(-u[0::2]))
        angle = 2.0 * np.pi * u[1::2]
        z = np.empty(2 * pairs)
        z[0::2] = radius * np.cos(angle)
        z[1::2] = radius * np.sin(angle)
        return z[:n]


def gaussian(rs: RandomSource, mean: float, variance: float, n: int) -> np.ndarray:
    """``n`` i.i.d. draws from N(mean, variance)."""
    if not variance >= 0:
        raise InvalidInputError(f"variance must be >= 0, got {variance}")
    return mean + math.sqrt(variance) * rs.standard_normal(n)
