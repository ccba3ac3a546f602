"""``tableval`` command line: evaluate, perturb, sweep.

Exit codes: 0 success, 1 data error, 2 usage error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Sequence

from .evaluate import GEOMETRIC, METRICS, Options, UnknownMetric, evaluate_corpus, metric_score, parse_metrics
from .ingest import Document, IngestError, read_document, write_document
from .model import TableError
from .perturb import KINDS, SWEEP_PARAM, Perturbation, PerturbationError, SweepRow, apply, sweep_to_csv

log = logging.getLogger("tableval")

INT_PARAMS = {"row", "k"}


class DataError(Exception):
    pass


def _metrics_arg(value: str) -> tuple[str, ...]:
    try:
        return parse_metrics(value)
    except UnknownMetric as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _thresholds_arg(value: str) -> tuple[float, ...]:
    try:
        out = tuple(float(v) for v in value.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid threshold list {value!r}") from None
    if not out or any(not 0.0 < t <= 1.0 for t in out):
        raise argparse.ArgumentTypeError("thresholds must be a non-empty list of values in (0, 1]")
    return out


def _jobs_arg(value: str) -> int:
    try:
        jobs = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"--jobs expects an integer, got {value!r}") from None
    if jobs < 1:
        raise argparse.ArgumentTypeError("--jobs must be >= 1")
    return jobs


def _anchor_arg(value: str) -> tuple[int, int]:
    try:
        r, c = (int(v) for v in value.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected ROW,COL, got {value!r}") from None
    return r, c


def _add_kind_params(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("perturbation parameters")
    g.add_argument("--kind", required=True, choices=KINDS)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--row", type=int, help="drop_row / drop_empty_row")
    g.add_argument("--dx", type=float, help="translate_bboxes")
    g.add_argument("--dy", type=float, help="translate_bboxes")
    g.add_argument("--factor", type=float, help="scale_bboxes")
    g.add_argument("--k", type=int, help="corrupt_text: substitutions per cell")
    g.add_argument("--match", help="blank_cells: blank cells with exactly this text")
    g.add_argument("--cell", type=_anchor_arg, action="append", help="blank_cells: ROW,COL anchor (repeatable)")
    g.add_argument("--fraction", type=float, help="blank_cells: share of non-empty cells to blank")


def _perturbation(args) -> Perturbation:
    params = {}
    for name in ("row", "dx", "dy", "factor", "k", "match", "fraction"):
        value = getattr(args, name)
        if value is not None:
            params[name] = value
    if args.cell:
        params["cells"] = [list(a) for a in args.cell]
    return Perturbation(args.kind, params, args.seed)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tableval", description="Table structure recognition metrics.")
    sub = parser.add_subparsers(dest="command", required=True)

    ev = sub.add_parser("evaluate", help="score predictions against ground truth")
    ev.add_argument("--gt", required=True)
    ev.add_argument("--pred", required=True)
    ev.add_argument(
        "--metrics",
        type=_metrics_arg,
        default=METRICS,
        help=f"comma-separated subset of {','.join(METRICS)}",
    )
    ev.add_argument("--iou-thresholds", type=_thresholds_arg, default=Options().thresholds)
    ev.add_argument("--flatten-row-groups", action="store_true")
    ev.add_argument("--format", choices=("json", "csv"), default="json")
    ev.add_argument("--output")
    ev.add_argument("--jobs", type=_jobs_arg, default=None)

    pt = sub.add_parser("perturb", help="write a corrupted copy of a document")
    pt.add_argument("--input", required=True)
    pt.add_argument("--output", required=True)
    _add_kind_params(pt)

    sw = sub.add_parser("sweep", help="metric scores across a perturbation parameter grid")
    sw.add_argument("--gt", required=True)
    sw.add_argument("--grid", required=True, help="comma-separated parameter values")
    sw.add_argument("--param", help="parameter to vary (defaults per kind)")
    sw.add_argument("--metrics", type=_metrics_arg, required=True)
    sw.add_argument("--output", required=True)
    _add_kind_params(sw)
    return parser


def _load(path: str) -> Document:
    try:
        return read_document(path)
    except OSError as exc:
        raise DataError(f"{path}: {exc.strerror or exc}") from exc
    except (IngestError, TableError) as exc:
        raise DataError(f"{path}: {exc}") from exc


def _write(text: str, path: Optional[str]) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise DataError(f"{path}: {exc.strerror or exc}") from exc


def _cmd_evaluate(args) -> None:
    with ThreadPoolExecutor(max_workers=2) as pool:
        gt_future = pool.submit(_load, args.gt)
        pred_future = pool.submit(_load, args.pred)
        gt, pred = gt_future.result(), pred_future.result()
    options = Options(args.iou_thresholds, args.flatten_row_groups)
    report = evaluate_corpus(gt, pred, args.metrics, options, args.jobs)
    _write(report.to_json() if args.format == "json" else report.to_csv(), args.output)


def _cmd_perturb(args) -> None:
    doc = _load(args.input)
    p = _perturbation(args)
    tables = []
    for table_id, tree in doc:
        try:
            tables.append((table_id, apply(p, tree)))
        except PerturbationError as exc:
            raise DataError(f"table {table_id!r}: {exc}") from exc
    try:
        write_document(Document(tuple(tables)), args.output)
    except OSError as exc:
        raise DataError(f"{args.output}: {exc.strerror or exc}") from exc


def _grid_values(raw: str, param: str) -> list:
    values = []
    for item in raw.split(","):
        item = item.strip()
        if not item:
            continue
        try:
            values.append(int(item) if param in INT_PARAMS else float(item))
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid grid value {item!r} for {param}") from None
    return values


def _cmd_sweep(args) -> None:
    doc = _load(args.gt)
    family = _perturbation(args)
    param = args.param or SWEEP_PARAM[family.kind]
    grid = _grid_values(args.grid, param)
    for table_id, tree in doc:
        if not tree.has_geometry and GEOMETRIC.intersection(args.metrics):
            raise DataError(f"table {table_id!r}: IOU metrics requested but the table has no bboxes")
    rows = []
    for value in grid:
        p = family.with_param(param, value)
        try:
            pairs = [(tree, apply(p, tree)) for _, tree in doc]
        except PerturbationError as exc:
            raise DataError(f"{param}={value}: {exc}") from exc
        for metric in args.metrics:
            scores = [metric_score(gt, pred, metric) for gt, pred in pairs]
            rows.append(SweepRow(value, metric, sum(scores) / len(scores) if scores else 0.0))
    _write(sweep_to_csv(rows), args.output)


def _configure_logging() -> None:
    level = os.environ.get("TABLEVAL_LOG", "warn").lower()
    levels = {"error": logging.ERROR, "warn": logging.WARNING, "info": logging.INFO, "debug": logging.DEBUG}
    logging.basicConfig(level=levels.get(level, logging.WARNING), format="tableval: %(levelname)s: %(message)s")


def run_cli(argv: Optional[Sequence[str]] = None) -> int:
    _configure_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    commands = {"evaluate": _cmd_evaluate, "perturb": _cmd_perturb, "sweep": _cmd_sweep}
    try:
        commands[args.command](args)
    except argparse.ArgumentTypeError as exc:
        parser.print_usage(sys.stderr)
        print(f"tableval: error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"tableval: error: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
