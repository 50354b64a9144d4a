"""Command-line entry point: ``semelbow <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence


from . import __version__, sem_learner
from .elbow import build_curve, detect, guaed, map_to_lambda
from .errors import (
    ConvergenceError,
    CurveTooShortError,
    InvalidInputError,
    MappingUnavailableError,
    ParseError,
)
from .fileio import (
    DatasetSpec,
    Orientation,
    RunConfig,
    export_graph,
    load_dataset,
    meta_block,
    read_curve_csv,
    write_csv,
    write_json,
)
from .matrix_core import GraphSignalMatrix
from .ranking import csv_rows, format_markdown, neighbor_subgraph, rank
from .sweep import SCENARIOS, ErrorRows, ScenarioConfig, curve_samples, make_grid, sweep
from .synthetic import Z_AXES, SyntheticScenario, run_containment

log = logging.getLogger("semelbow")

SWEEP_HEADER = ["lambda", "links", "nmse_all", "nmse_outputs", "kkt", "iterations", "failed"]
CURVE_HEADER = ["z", "v", "lambda"]


def _add_numeric(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0, help="seed for any randomized step")
    p.add_argument("--eps", type=float, default=sem_learner.DEFAULT_EPS, help="edge threshold")
    p.add_argument("--tol", type=float, default=sem_learner.DEFAULT_TOL, help="solver tolerance")
    p.add_argument("--max-iter", type=int, default=sem_learner.DEFAULT_MAX_ITER)
    p.add_argument("--out", default=".", help="output directory")


def _add_data(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data", required=True, help="CSV feature table")
    p.add_argument(
        "--orientation",
        choices=[o.value for o in Orientation],
        default=Orientation.ROWS_ARE_OBSERVATIONS.value,
    )
    p.add_argument("--outputs", default="last:2", help='"last:k" or comma-separated column names')
    p.add_argument("--normalize", action="store_true", help="z-score every feature")
    p.add_argument("--delimiter", default=",")


def _add_grid(p: argparse.ArgumentParser) -> None:
    p.add_argument("--grid-points", type=int, default=200)
    p.add_argument("--min-ratio", type=float, default=1e-3)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="semelbow", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("learn", help="solve for one lambda and export the graph")
    _add_data(p)
    _add_numeric(p)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--no-interlink", action="store_true")

    p = sub.add_parser("sweep", help="regularization path, sweep table and both error curves")
    _add_data(p)
    _add_numeric(p)
    _add_grid(p)
    p.add_argument("--no-interlink", action="store_true")
    p.add_argument("--cold", action="store_true", help="independent cold-start solves")

    p = sub.add_parser("elbow", help="interval elbow of a curve CSV (columns z, v[, lambda])")
    p.add_argument("--curve", required=True)
    p.add_argument("--out", default=None, help="write elbow.json here instead of stdout only")

    p = sub.add_parser("rank", help="ranked output connections at one lambda")
    _add_data(p)
    _add_numeric(p)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--no-interlink", action="store_true")

    p = sub.add_parser("bench-lasso", help="synthetic lasso containment benchmark")
    p.add_argument("--scenario", choices=["s1", "s2"], required=True)
    p.add_argument("--runs", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--grid-points", type=int, default=300)
    p.add_argument("--z-axis", choices=Z_AXES, default="lambda_gap")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default=".")

    p = sub.add_parser("pipeline", help="both sweeps, four scenario curves, elbows, graphs, reports")
    _add_data(p)
    _add_numeric(p)
    _add_grid(p)
    p.add_argument("--cold", action="store_true")
    return parser


def _dataset(args) -> GraphSignalMatrix:
    return load_dataset(
        DatasetSpec(args.data, Orientation(args.orientation), args.outputs, args.normalize, args.delimiter)
    )


def _config(args, **kw) -> RunConfig:
    base = dict(
        command=args.command,
        data=getattr(args, "data", None),
        tol=getattr(args, "tol", None),
        max_iter=getattr(args, "max_iter", None),
        eps=getattr(args, "eps", None),
        seed=getattr(args, "seed", None),
        out_dir=getattr(args, "out", None),
    )
    if hasattr(args, "grid_points") and args.command != "bench-lasso":
        base.update(grid_points=args.grid_points, min_ratio=args.min_ratio, warm=not args.cold)
    base.update(kw)
    return RunConfig(**base)


def _outdir(path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _solve(x, lam, mask, args) -> sem_learner.SemSolution:
    return sem_learner.solve(sem_learner.SemProblem(x, lam, mask), args.tol, args.max_iter)


def _write_graph(out: Path, stem: str, x, a, meta, eps) -> None:
    outs = sorted(x.output_nodes)
    (out / f"{stem}.json").write_text(export_graph(a, x.node_names, "json", outs, eps, meta))
    (out / f"{stem}.dot").write_text(export_graph(a, x.node_names, "dot", outs, eps, meta))


def _write_ranking(out: Path, stem: str, x, a, lam, allowed, eps, meta) -> dict:
    rc = rank(a, x, eps, lam, allowed)
    comment = "<!-- " + json.dumps(meta, separators=(",", ":")) + " -->\n"
    (out / f"{stem}.md").write_text(comment + format_markdown(rc, x))
    rows = csv_rows(rc, x)
    write_csv(out / f"{stem}.csv", rows[0], rows[1:], meta)
    sub = neighbor_subgraph(a, x.output_nodes, eps)
    return {
        "lambda": lam,
        "interlink_allowed": allowed,
        "outputs": {
            x.node_names[o]: [{"id": j + 1, "label": lab, "weight": w} for j, lab, w in nbs]
            for o, nbs in rc.per_output.items()
        },
        "other_connections": [[i + 1, j + 1, w] for i, j, w in rc.other_connections],
        "neighbor_subgraph": [[i + 1, j + 1, w] for i, j, w in sub],
    }


def _sweep_rows(sr):
    return [
        (r.lam, r.link_count, r.nmse_all, r.nmse_outputs, r.kkt_violation, r.iterations, r.failed)
        for r in sr.records
    ]


def cmd_learn(args) -> int:
    x = _dataset(args)
    sc = ScenarioConfig(not args.no_interlink)
    mask = sc.mask(x)
    sol = _solve(x, args.lam, mask, args)
    out = _outdir(args.out)
    meta = meta_block(_config(args, lam=args.lam, allow_output_interlink=sc.allow_output_interlink))
    _write_graph(out, "graph", x, sol.a_hat, meta, args.eps)
    diag = {
        "lambda": args.lam,
        "lambda_max": sem_learner.lambda_max(x, mask),
        "links": len(sem_learner.edge_set(sol.a_hat, args.eps)),
        "objective": sol.objective,
        "fit_error": sol.fit_error,
        "kkt_violation": sol.kkt_violation,
        "iterations": sol.iterations,
        "meta": meta,
    }
    write_json(out / "kkt.json", diag)
    return 0


def _run_sweep(x, sc, args):
    # the unmasked lambda_max tops both masks, so all scenarios share one grid
    grid = make_grid(sem_learner.lambda_max(x), args.grid_points, args.min_ratio)
    return sweep(x, sc, grid, warm=not args.cold, tol=args.tol, max_iter=args.max_iter, eps=args.eps)


def _write_sweep(out: Path, x, sr, allowed: bool, meta) -> None:
    write_csv(out / "sweep.csv", SWEEP_HEADER, _sweep_rows(sr), meta)
    for rows in (ErrorRows.ALL, ErrorRows.OUTPUTS):
        samples = curve_samples(sr, ScenarioConfig(allowed, rows))
        write_csv(out / f"curve_{rows.value}.csv", CURVE_HEADER, samples, meta)


def cmd_sweep(args) -> int:
    x = _dataset(args)
    sc = ScenarioConfig(not args.no_interlink)
    sr = _run_sweep(x, sc, args)
    meta = meta_block(_config(args, allow_output_interlink=sc.allow_output_interlink))
    _write_sweep(_outdir(args.out), x, sr, sc.allow_output_interlink, meta)
    return 0


def cmd_elbow(args) -> int:
    _, res = detect(read_curve_csv(args.curve))
    doc = res.to_dict()
    doc["meta"] = meta_block(RunConfig(command="elbow", data=args.curve))
    if args.out:
        write_json(_outdir(args.out) / "elbow.json", doc)
    sys.stdout.write(json.dumps({k: v for k, v in doc.items() if k != "meta"}) + "\n")
    return 0


def cmd_rank(args) -> int:
    x = _dataset(args)
    allowed = not args.no_interlink
    sol = _solve(x, args.lam, ScenarioConfig(allowed).mask(x), args)
    out = _outdir(args.out)
    meta = meta_block(_config(args, lam=args.lam, allow_output_interlink=allowed))
    report = _write_ranking(out, "ranking", x, sol.a_hat, args.lam, allowed, args.eps, meta)
    _write_graph(out, "graph", x, sol.a_hat, meta, args.eps)
    write_json(out / "ranking.json", dict(report, meta=meta))
    return 0


CONTAINMENT_HEADER = [
    "run", "seed", "lambda_max", "truth_lo", "truth_hi", "truth_contiguous",
    "detected_hi", "detected_lo", "point_lambda", "k1", "k2", "contained",
    "overshoot", "overshoot_side",
]


def cmd_bench(args) -> int:
    sc = SyntheticScenario.named(
        args.scenario, runs=args.runs, seed=args.seed, grid_points=args.grid_points, z_axis=args.z_axis
    )
    report = run_containment(sc, workers=args.workers)
    out = _outdir(args.out)
    meta = meta_block(RunConfig(command="bench-lasso", seed=args.seed, extra={"scenario": args.scenario}))
    meta["config"]["synthetic"] = sc.config_dict()
    rows = []
    for r in report.runs:
        t = r.truth
        rows.append((
            r.run, r.seed, r.lambda_max,
            t.lo if t else "", t.hi if t else "", t.contiguous if t else "",
            r.detected[0], r.detected[1], r.point_lambda, r.k1, r.k2,
            "" if r.contained is None else r.contained, r.overshoot, r.overshoot_side,
        ))
    write_csv(out / "containment.csv", CONTAINMENT_HEADER, rows, meta)
    summary = dict(report.summary(), meta=meta)
    write_json(out / "containment_summary.json", summary)
    sys.stdout.write(json.dumps(report.summary()) + "\n")
    return 0


def cmd_pipeline(args) -> int:
    x = _dataset(args)
    out = _outdir(args.out)
    cache: dict = {}

    def solution(lam: float, allowed: bool):
        key = (lam, allowed)
        if key not in cache:
            cache[key] = _solve(x, lam, ScenarioConfig(allowed).mask(x), args)
        return cache[key]

    table = {}
    for allowed, scen_ids in ((True, (1, 3)), (False, (2, 4))):
        sc = ScenarioConfig(allowed)
        sr = _run_sweep(x, sc, args)
        sweep_dir = _outdir(out / ("sweep_interlink" if allowed else "sweep_no_interlink"))
        meta = meta_block(_config(args, allow_output_interlink=allowed))
        _write_sweep(sweep_dir, x, sr, allowed, meta)

        for sid in scen_ids:
            scen = SCENARIOS[sid]
            sdir = _outdir(out / f"scenario{sid}")
            smeta = meta_block(_config(
                args, allow_output_interlink=allowed, error_rows=ErrorRows(scen.error_rows).value,
                extra={"scenario": sid},
            ))
            curve = build_curve(curve_samples(sr, scen))
            res = map_to_lambda(curve, guaed(curve))
            write_json(sdir / "elbow.json", dict(res.to_dict(), meta=smeta))
            points = {
                "elbow": res.lambda_point,
                "k1": res.lambda_interval[0],
                "k2": res.lambda_interval[1],
            }
            reports = {}
            for stem, lam in points.items():
                sol = solution(lam, allowed)
                _write_graph(sdir, f"graph_{stem}", x, sol.a_hat, smeta, args.eps)
                if x.output_nodes:
                    reports[stem] = _write_ranking(
                        sdir, f"ranking_{stem}", x, sol.a_hat, lam, allowed, args.eps, smeta
                    )
            write_json(sdir / "rankings.json", dict(reports, meta=smeta))
            table[f"scenario{sid}"] = {
                "interlink_allowed": allowed,
                "error_rows": ErrorRows(scen.error_rows).value,
                "elbow_links": res.point_elbow,
                "interval_links": [res.k1_star, res.k2_star],
                "elbow_lambda": res.lambda_point,
                "interval_lambda": list(res.lambda_interval),
                "areas": list(res.areas),
            }
    write_json(out / "summary.json", dict(table, meta=meta_block(_config(args))))
    return 0


COMMANDS = {
    "learn": cmd_learn,
    "sweep": cmd_sweep,
    "elbow": cmd_elbow,
    "rank": cmd_rank,
    "bench-lasso": cmd_bench,
    "pipeline": cmd_pipeline,
}

INPUT_ERRORS = (InvalidInputError, ParseError, CurveTooShortError, MappingUnavailableError, OSError)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return COMMANDS[args.command](args)
    except INPUT_ERRORS as exc:
        _report(exc)
        return 2
    except ConvergenceError as exc:
        _report(exc)
        return 3


def _report(exc: BaseException) -> None:
    line = {"error": type(exc).__name__, "message": str(exc)}
    if isinstance(exc, ParseError) and exc.row is not None:
        line.update(row=exc.row, col=exc.col)
    sys.stderr.write("error: " + json.dumps(line) + "\n")


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
