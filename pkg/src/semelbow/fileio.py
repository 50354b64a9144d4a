"""Dataset ingestion and deterministic result serialization (CSV, JSON, DOT)."""

from __future__ import annotations

import csv
import enum
import io
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from . import __version__
from .errors import InvalidInputError, ParseError
from .matrix_core import AdjacencyMatrix, GraphSignalMatrix

TOOL = "semelbow"


class Orientation(str, enum.Enum):
    ROWS_ARE_OBSERVATIONS = "observations"
    ROWS_ARE_FEATURES = "features"


@dataclass(frozen=True)
class DatasetSpec:
    """Where and how to read a feature table.

    ``output_columns`` is either a list of column names or a ``"last:k"`` rule.
    With ``ROWS_ARE_FEATURES`` the first cell of every row is the feature name
    and the header row (observation labels) is ignored.
    """

    path: str
    orientation: Orientation = Orientation.ROWS_ARE_OBSERVATIONS
    output_columns: object = "last:2"
    normalize: bool = False
    delimiter: str = ","


@dataclass(frozen=True)
class RunConfig:
    command: str
    data: Optional[str] = None
    allow_output_interlink: Optional[bool] = None
    error_rows: Optional[str] = None
    lam: Optional[float] = None
    grid_points: Optional[int] = None
    min_ratio: Optional[float] = None
    warm: Optional[bool] = None
    tol: Optional[float] = None
    max_iter: Optional[int] = None
    eps: Optional[float] = None
    seed: Optional[int] = None
    out_dir: Optional[str] = None
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = {k: v for k, v in asdict(self).items() if v is not None and k != "extra"}
        d.update(self.extra)
        return d


def meta_block(config: Optional[RunConfig]) -> dict:
    meta = {"tool": TOOL, "version": __version__}
    if config is not None:
        meta["config"] = config.to_dict()
    return meta


# --------------------------------------------------------------------------- datasets


def _parse_float(cell: str, row: int, col: int) -> float:
    try:
        val = float(cell)
    except ValueError:
        raise ParseError(f"non-numeric cell {cell!r}", row, col) from None
    if not math.isfinite(val):
        raise ParseError(f"non-finite cell {cell!r}", row, col)
    return val


def _resolve_outputs(rule, names: Sequence[str]) -> list[int]:
    if isinstance(rule, str) and rule.startswith("last:"):
        try:
            k = int(rule.split(":", 1)[1])
        except ValueError:
            raise InvalidInputError(f"bad output rule {rule!r}") from None
        if not 0 <= k <= len(names):
            raise InvalidInputError(f"cannot take the last {k} of {len(names)} columns")
        return list(range(len(names) - k, len(names)))
    if isinstance(rule, str):
        rule = [s for s in rule.split(",") if s]
    idx = []
    for name in rule:
        if name not in names:
            raise ParseError(f"output column {name!r} not found")
        idx.append(names.index(name))
    if len(set(idx)) != len(idx):
        raise InvalidInputError("output columns must be distinct")
    return idx


def load_dataset(spec: DatasetSpec) -> GraphSignalMatrix:
    """Read a CSV into an N x M graph signal matrix (features as rows)."""
    orientation = Orientation(spec.orientation)
    with open(spec.path, newline="") as fh:
        rows = list(csv.reader(fh, delimiter=spec.delimiter))
    rows = [r for r in rows if r and not (len(r) == 1 and not r[0].strip())]
    if len(rows) < 2:
        raise ParseError("need a header row and at least one data row")
    header, body = rows[0], rows[1:]

    if orientation is Orientation.ROWS_ARE_OBSERVATIONS:
        names = [h.strip() for h in header]
        width = len(names)
        values = np.empty((len(body), width))
        for r, row in enumerate(body, start=1):
            if len(row) != width:
                raise ParseError(f"expected {width} cells, found {len(row)}", r, len(row))
            for c, cell in enumerate(row, start=1):
                values[r - 1, c - 1] = _parse_float(cell, r, c)
        data = values.T
    else:
        names = [row[0].strip() for row in body]
        width = len(body[0])
        data = np.empty((len(body), width - 1))
        for r, row in enumerate(body, start=1):
            if len(row) != width:
                raise ParseError(f"expected {width} cells, found {len(row)}", r, len(row))
            for c, cell in enumerate(row[1:], start=2):
                data[r - 1, c - 2] = _parse_float(cell, r, c)

    outputs = _resolve_outputs(spec.output_columns, names)
    transform = None
    if spec.normalize:
        mean = data.mean(axis=1)
        std = data.std(axis=1)
        std[std == 0] = 1.0
        data = (data - mean[:, None]) / std[:, None]
        transform = tuple((float(m), float(s)) for m, s in zip(mean, std))
    return GraphSignalMatrix(data, tuple(names), frozenset(outputs), transform)


def write_dataset(x: GraphSignalMatrix, path) -> None:
    """Write observations as rows with a header of node names (inverse of load_dataset)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(x.node_names)
        for col in x.data.T:
            w.writerow([repr(float(v)) for v in col])


# --------------------------------------------------------------------------- serialization


def _clean(obj):
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, (np.floating,)):
        return _clean(float(obj))
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, enum.Enum):
        return obj.value
    return obj


def dumps_json(obj) -> str:
    """Deterministic JSON: insertion-ordered keys, shortest round-trip floats, NaN -> null."""
    return json.dumps(_clean(obj), indent=2, allow_nan=False) + "\n"


def write_json(path, obj) -> None:
    Path(path).write_text(dumps_json(obj))


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence], meta: Optional[dict] = None) -> None:
    """CSV with an optional leading ``# {json}`` metadata line."""
    buf = io.StringIO()
    if meta is not None:
        buf.write("# " + json.dumps(_clean(meta), separators=(",", ":")) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    Path(path).write_text(buf.getvalue())


def read_csv_table(path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if ln.strip() and not ln.startswith("#")]
    rows = list(csv.reader(lines))
    if not rows:
        raise ParseError(f"{path}: empty table")
    return [h.strip() for h in rows[0]], rows[1:]


def read_curve_csv(path) -> list[tuple]:
    """Samples ``(z, v[, lambda])`` from a curve CSV with columns z, v and optionally lambda."""
    header, rows = read_csv_table(path)
    for col in ("z", "v"):
        if col not in header:
            raise ParseError(f"curve file lacks a {col!r} column")
    iz, iv = header.index("z"), header.index("v")
    il = header.index("lambda") if "lambda" in header else None
    out = []
    for r, row in enumerate(rows, start=1):
        z = _parse_float(row[iz], r, iz + 1)
        v = _parse_float(row[iv], r, iv + 1)
        lam = _parse_float(row[il], r, il + 1) if il is not None else None
        out.append((z, v, lam))
    return out


# --------------------------------------------------------------------------- graphs


def export_graph(
    a: AdjacencyMatrix,
    names: Sequence[str],
    fmt_name: str = "json",
    outputs: Iterable[int] = (),
    eps: float = 0.0,
    meta: Optional[dict] = None,
) -> str:
    """Serialize a graph as JSON (nodes/edges/meta) or as an undirected DOT graph."""
    if len(names) != a.n_nodes:
        raise InvalidInputError("one name per node required")
    w = a.weights
    rows, cols = np.nonzero(np.triu(np.abs(w) > eps, 1))
    edges = [(int(i), int(j), float(w[i, j])) for i, j in zip(rows, cols)]
    outputs = set(int(o) for o in outputs)
    if fmt_name == "json":
        doc = {
            "nodes": [{"id": i, "name": str(n)} for i, n in enumerate(names)],
            "edges": [{"source": i, "target": j, "weight": wt} for i, j, wt in edges],
            "meta": dict(meta or {}, forbidden=[list(p) for p in sorted(a.forbidden_mask)]),
        }
        return dumps_json(doc)
    if fmt_name == "dot":
        top = max((abs(wt) for _, _, wt in edges), default=1.0) or 1.0
        lines = []
        if meta is not None:
            lines.append("// meta: " + json.dumps(_clean(meta), separators=(",", ":")))
        lines.append("graph G {")
        lines.append("  node [shape=circle];")
        for i, n in enumerate(names):
            style = ' style=filled fillcolor="#f4a6a6" shape=doublecircle' if i in outputs else ""
            lines.append(f'  n{i} [label="{_dot_escape(n)}"{style}];')
        for i, j, wt in edges:
            pen = 0.5 + 4.5 * abs(wt) / top
            lines.append(f'  n{i} -- n{j} [weight={wt!r} penwidth={pen:.3f}];')
        lines.append("}")
        return "\n".join(lines) + "\n"
    raise InvalidInputError(f"unknown graph format {fmt_name!r}")


def _dot_escape(s: str) -> str:
    return str(s).replace("\\", "\\\\").replace('"', '\\"')


def import_graph_json(text: str) -> tuple[AdjacencyMatrix, list[str]]:
    doc = json.loads(text)
    names = [n["name"] for n in sorted(doc["nodes"], key=lambda n: n["id"])]
    w = np.zeros((len(names), len(names)))
    for e in doc["edges"]:
        w[e["source"], e["target"]] = w[e["target"], e["source"]] = float(e["weight"])
    mask = [tuple(p) for p in doc.get("meta", {}).get("forbidden", [])]
    return AdjacencyMatrix(w, frozenset(mask)), names
