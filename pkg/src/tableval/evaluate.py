"""Per-table metric computation and corpus aggregation."""

from __future__ import annotations

import csv
import io
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .adjacency import DEFAULT_THRESHOLDS, adjacency_iou_weighted_f1, adjacency_text
from .ingest import Document
from .model import TableTree, flatten_row_groups
from .teds import teds_iou, teds_text

log = logging.getLogger("tableval")

METRICS = ("adj-text", "adj-iou", "teds-text", "teds-iou")
GEOMETRIC = frozenset({"adj-iou", "teds-iou"})


class UnknownMetric(ValueError):
    pass


def parse_metrics(spec: str | Sequence[str]) -> tuple[str, ...]:
    names = [m.strip() for m in spec.split(",")] if isinstance(spec, str) else list(spec)
    names = [m for m in names if m]
    bad = [m for m in names if m not in METRICS]
    if bad or not names:
        raise UnknownMetric(f"unknown metric(s) {', '.join(bad) or '(none)'}; valid: {', '.join(METRICS)}")
    # canonical order, duplicates dropped
    return tuple(m for m in METRICS if m in names)


@dataclass(frozen=True)
class Options:
    thresholds: tuple[float, ...] = DEFAULT_THRESHOLDS
    flatten_row_groups: bool = False


def metric_detail(gt: TableTree, pred: TableTree, metric: str, options: Options = Options()) -> tuple[float, dict]:
    if options.flatten_row_groups:
        gt, pred = flatten_row_groups(gt), flatten_row_groups(pred)
    if metric == "adj-text":
        prf = adjacency_text(gt, pred)
        return prf.f1, prf.as_dict()
    if metric == "adj-iou":
        result = adjacency_iou_weighted_f1(gt, pred, options.thresholds)
        return result.weighted_f1, result.as_dict()
    if metric == "teds-text":
        s = teds_text(gt, pred)
        return s.score, s.as_dict()
    if metric == "teds-iou":
        s = teds_iou(gt, pred)
        return s.score, s.as_dict()
    raise UnknownMetric(metric)


def metric_score(gt: TableTree, pred: TableTree, metric: str, options: Options = Options()) -> float:
    return metric_detail(gt, pred, metric, options)[0]


@dataclass
class TableResult:
    table_id: str
    scores: dict[str, float]
    details: dict[str, dict]
    skipped_metrics: dict[str, str] = field(default_factory=dict)

    def as_dict(self) -> dict:
        out = {
            "table_id": self.table_id,
            "scores": {m: round(v, 4) for m, v in self.scores.items()},
            "details": _round_floats(self.details),
        }
        if self.skipped_metrics:
            out["skipped_metrics"] = dict(self.skipped_metrics)
        return out


@dataclass
class MetricReport:
    metrics: tuple[str, ...]
    per_table: list[TableResult]
    corpus: dict[str, float]
    skipped: list[tuple[str, str]]

    def as_dict(self) -> dict:
        return {
            "metrics": list(self.metrics),
            "per_table": [t.as_dict() for t in self.per_table],
            "corpus": {m: round(v, 4) for m, v in self.corpus.items()},
            "skipped": [{"table_id": t, "reason": r} for t, r in self.skipped],
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=False) + "\n"

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["table_id", "metric", "score"])
        for t in self.per_table:
            for m, v in t.scores.items():
                writer.writerow([t.table_id, m, f"{v:.4f}"])
        return buffer.getvalue()


def _round_floats(value):
    if isinstance(value, float):
        return round(value, 4)
    if isinstance(value, dict):
        return {k: _round_floats(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_round_floats(v) for v in value]
    return value


def _evaluate_table(args) -> TableResult:
    table_id, gt, pred, metrics, options = args
    scores, details, skipped = {}, {}, {}
    for metric in metrics:
        if pred is None:
            scores[metric] = 0.0
            details[metric] = {"reason": "missing prediction"}
            continue
        if metric in GEOMETRIC and not (gt.has_geometry and pred.has_geometry):
            skipped[metric] = "no geometry"
            continue
        scores[metric], details[metric] = metric_detail(gt, pred, metric, options)
    return TableResult(table_id, scores, details, skipped)


def default_jobs() -> int:
    try:
        return max(1, len(os.sched_getaffinity(0)))
    except AttributeError:  # pragma: no cover - non-Linux
        return os.cpu_count() or 1


def evaluate_corpus(
    gt: Document,
    pred: Document,
    metrics: Sequence[str] = METRICS,
    options: Options = Options(),
    jobs: Optional[int] = None,
) -> MetricReport:
    """Score every ground-truth table against the prediction with the same id.

    Missing predictions score 0 on every metric; predictions without a
    ground-truth table are listed as skipped. Results are ordered by id.
    """
    metrics = parse_metrics(metrics)
    pred_by_id = pred.as_dict()
    gt_ids = set(gt.ids)
    tasks = [
        (table_id, tree, pred_by_id.get(table_id), metrics, options)
        for table_id, tree in sorted(gt.tables, key=lambda item: item[0])
    ]
    jobs = default_jobs() if jobs is None else jobs
    if jobs <= 1 or len(tasks) <= 1:
        results = [_evaluate_table(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=min(jobs, len(tasks))) as pool:
            results = list(pool.map(_evaluate_table, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))

    per_table, skipped = [], []
    for result in results:
        if result.scores:
            per_table.append(result)
        else:
            reasons = sorted(set(result.skipped_metrics.values()))
            skipped.append((result.table_id, "; ".join(reasons)))
            log.info("skipped table %s: %s", result.table_id, skipped[-1][1])
    for table_id in sorted(set(pred.ids) - gt_ids):
        skipped.append((table_id, "unmatched prediction"))
        log.warning("prediction %s has no ground truth", table_id)

    corpus = {}
    for metric in metrics:
        values = [t.scores[metric] for t in per_table if metric in t.scores]
        if values:
            corpus[metric] = sum(values) / len(values)
    return MetricReport(metrics, per_table, corpus, skipped)
