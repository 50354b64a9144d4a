"""Ranked output connections of a learned graph (the per-output neighbor tables)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .matrix_core import AdjacencyMatrix, GraphSignalMatrix
from .sem_learner import DEFAULT_EPS, edge_set

Neighbor = tuple[int, str, float]


def node_label(x: GraphSignalMatrix, i: int) -> str:
    """Outputs by name, every other node by its 1-based index."""
    return x.node_names[i] if i in x.output_nodes else str(i + 1)


@dataclass(frozen=True)
class RankedConnections:
    per_output: dict  # output index -> tuple of (neighbor id, label, weight)
    other_connections: tuple  # (i, j, weight) with i < j, no output endpoint
    lam: float | None = None
    interlink_allowed: bool | None = None

    def neighbor_ids(self, output: int) -> list[int]:
        return [nb for nb, _, _ in self.per_output[output]]


def _by_magnitude(item):
    # descending |w|, ties to the smaller id(s)
    return (-abs(item[-1]),) + tuple(item[:-1])


def rank(
    a: AdjacencyMatrix,
    x: GraphSignalMatrix,
    eps: float = DEFAULT_EPS,
    lam: float | None = None,
    interlink_allowed: bool | None = None,
) -> RankedConnections:
    """Neighbors of each output ordered by decreasing |weight|, plus the edges among them."""
    if not x.output_nodes:
        raise InvalidInputError("no output nodes designated")
    if a.n_nodes != x.n_nodes:
        raise InvalidInputError("adjacency and data dimensions differ")
    w = a.weights
    outputs = sorted(x.output_nodes)
    per_output = {}
    union = set()
    for o in outputs:
        nbs = [int(j) for j in np.flatnonzero(np.abs(w[o]) > eps) if j != o]
        ranked = sorted(((j, float(w[o, j])) for j in nbs), key=_by_magnitude)
        per_output[o] = tuple((j, node_label(x, j), wt) for j, wt in ranked)
        union.update(nbs)
    inner = union - set(outputs)
    others = [(i, j, wt) for i, j, wt in edge_set(a, eps) if i in inner and j in inner]
    others.sort(key=_by_magnitude)
    return RankedConnections(per_output, tuple(others), lam, interlink_allowed)


def neighbor_subgraph(a: AdjacencyMatrix, outputs, eps: float = DEFAULT_EPS) -> list[tuple[int, int, float]]:
    """Edges touching an output plus edges among the outputs' neighbors."""
    outputs = set(int(o) for o in outputs)
    edges = edge_set(a, eps)
    nbrs = set()
    for i, j, _ in edges:
        if i in outputs:
            nbrs.add(j)
        if j in outputs:
            nbrs.add(i)
    keep = nbrs | outputs
    return [
        (i, j, wt) for i, j, wt in edges if i in outputs or j in outputs or (i in keep and j in keep)
    ]


def format_markdown(rc: RankedConnections, x: GraphSignalMatrix) -> str:
    lam = "" if rc.lam is None else f"{rc.lam:.2f}"
    other = _other_text(rc, x)
    lines = ["| Output | Connections (decreasing \\|weight\\|) | lambda | Other connections |",
             "|---|---|---|---|"]
    for o, nbs in rc.per_output.items():
        conns = ", ".join(label for _, label, _ in nbs) or "(none)"
        lines.append(f"| {x.node_names[o]} | {conns} | {lam} | {other or '(none)'} |")
    return "\n".join(lines) + "\n"


def _other_text(rc: RankedConnections, x: GraphSignalMatrix) -> str:
    return ", ".join(f"{node_label(x, i)}-{node_label(x, j)}" for i, j, _ in rc.other_connections)


def csv_rows(rc: RankedConnections, x: GraphSignalMatrix) -> list[list[str]]:
    header = ["output", "connections", "weights", "lambda", "other_connections"]
    rows = [header]
    other = _other_text(rc, x)
    for o, nbs in rc.per_output.items():
        rows.append([
            x.node_names[o],
            ";".join(label for _, label, _ in nbs),
            ";".join(repr(wt) for _, _, wt in nbs),
            "" if rc.lam is None else f"{rc.lam:.2f}",
            other.replace(", ", ";"),
        ])
    return rows
