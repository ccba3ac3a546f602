"""Adjacency-relation F1 metrics.

Relations link each non-empty cell to its nearest non-empty neighbour to the
right and below, skipping empty cells. The text variant compares relations
keyed by cell text; the IOU variant first maps predicted cells onto ground
truth cells by box overlap and compares relations keyed by ground-truth cell.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Hashable, Iterable, NamedTuple, Sequence

from .geometry import iou
from .model import Cell, TableGrid, TableTree, build_grid

HORIZONTAL = "horizontal"
VERTICAL = "vertical"

DEFAULT_THRESHOLDS = (0.6, 0.7, 0.8, 0.9)


class AdjacencyRelation(NamedTuple):
    from_key: Hashable
    to_key: Hashable
    direction: str


@dataclass(frozen=True)
class PRF:
    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    fn: int

    @classmethod
    def from_counts(cls, tp: int, fp: int, fn: int) -> "PRF":
        # two empty relation sets agree perfectly
        if tp == fp == fn == 0:
            return cls(1.0, 1.0, 1.0, 0, 0, 0)
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        return cls(precision, recall, f1, tp, fp, fn)

    def as_dict(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
        }


def extract_relations(grid: TableGrid, cells: Sequence[Cell]) -> list[AdjacencyRelation]:
    """Relations between cell indices, one per ordered pair and direction.

    Spanning cells scan from every row (or column) they occupy.
    """
    relations = []
    for i, cell in enumerate(cells):
        if cell.is_empty:
            continue
        right = set()
        for r in range(cell.row, cell.row_end):
            for c in range(cell.col_end, grid.n_cols):
                j = grid.occupancy.get((r, c))
                if j is not None and j != i and not cells[j].is_empty:
                    right.add(j)
                    break
        below = set()
        for c in range(cell.col, cell.col_end):
            for r in range(cell.row_end, grid.n_rows):
                j = grid.occupancy.get((r, c))
                if j is not None and j != i and not cells[j].is_empty:
                    below.add(j)
                    break
        relations.extend(AdjacencyRelation(i, j, HORIZONTAL) for j in sorted(right))
        relations.extend(AdjacencyRelation(i, j, VERTICAL) for j in sorted(below))
    return relations


def _cells_and_relations(table: TableTree | Sequence[Cell]):
    cells = table.cells if isinstance(table, TableTree) else tuple(table)
    grid = table.grid if isinstance(table, TableTree) else build_grid(cells)
    return cells, extract_relations(grid, cells)


def text_relations(table: TableTree | Sequence[Cell]) -> Counter:
    cells, relations = _cells_and_relations(table)
    return Counter(
        AdjacencyRelation(cells[r.from_key].clean_text, cells[r.to_key].clean_text, r.direction)
        for r in relations
    )


def prf_from_multisets(gt: Counter, pred: Counter) -> PRF:
    tp = sum((gt & pred).values())
    return PRF.from_counts(tp, sum(pred.values()) - tp, sum(gt.values()) - tp)


def adjacency_text_prf(gt_relations: Iterable, pred_relations: Iterable) -> PRF:
    """Exact, case-sensitive match of (from_text, to_text, direction) triples."""
    gt = gt_relations if isinstance(gt_relations, Counter) else Counter(gt_relations)
    pred = pred_relations if isinstance(pred_relations, Counter) else Counter(pred_relations)
    return prf_from_multisets(gt, pred)


def adjacency_text(gt: TableTree, pred: TableTree) -> PRF:
    return adjacency_text_prf(text_relations(gt), text_relations(pred))


def map_cells_by_iou(
    gt_cells: Sequence[Cell],
    pred_cells: Sequence[Cell],
    threshold: float,
) -> dict[int, int]:
    """Greedy one-to-one mapping of gt cell index to pred cell index.

    Pairs are taken in descending IOU order (ties by gt then pred position)
    while both cells are free and IOU >= threshold. Cells without a bbox
    never match.
    """
    if not 0.0 < threshold <= 1.0:
        raise ValueError(f"threshold must lie in (0, 1], got {threshold}")
    candidates = []
    for gi, g in enumerate(gt_cells):
        if g.bbox is None:
            continue
        for pi, p in enumerate(pred_cells):
            if p.bbox is None:
                continue
            overlap = iou(g.bbox, p.bbox)
            if overlap >= threshold:
                candidates.append((-overlap, gi, pi))
    candidates.sort()
    mapping: dict[int, int] = {}
    used_pred: set[int] = set()
    for _, gi, pi in candidates:
        if gi in mapping or pi in used_pred:
            continue
        mapping[gi] = pi
        used_pred.add(pi)
    return mapping


@dataclass(frozen=True)
class IouAdjacencyResult:
    thresholds: tuple[float, ...]
    per_threshold: tuple[PRF, ...]
    weighted_f1: float

    def as_dict(self) -> dict:
        return {
            "weighted_f1": self.weighted_f1,
            "per_threshold": [
                {"threshold": t, **prf.as_dict()} for t, prf in zip(self.thresholds, self.per_threshold)
            ],
        }


def adjacency_iou_weighted_f1(
    gt: TableTree,
    pred: TableTree,
    thresholds: Sequence[float] = DEFAULT_THRESHOLDS,
) -> IouAdjacencyResult:
    """Per-threshold PRF and the threshold-weighted mean of the F1 scores."""
    thresholds = tuple(float(t) for t in thresholds)
    if not thresholds:
        raise ValueError("at least one IOU threshold is required")
    gt_cells, gt_rel = _cells_and_relations(gt)
    pred_cells, pred_rel = _cells_and_relations(pred)
    gt_counter = Counter(gt_rel)

    # only non-empty cells take part in relations, so only they compete for matches
    gt_ids = [i for i, c in enumerate(gt_cells) if not c.is_empty]
    pred_ids = [i for i, c in enumerate(pred_cells) if not c.is_empty]

    results = []
    for t in thresholds:
        local = map_cells_by_iou([gt_cells[i] for i in gt_ids], [pred_cells[i] for i in pred_ids], t)
        pred_to_gt = {pred_ids[p]: gt_ids[g] for g, p in local.items()}

        def key(i: int) -> Hashable:
            gi = pred_to_gt.get(i)
            return gi if gi is not None else ("unmatched", i)

        relabeled = Counter(AdjacencyRelation(key(r.from_key), key(r.to_key), r.direction) for r in pred_rel)
        results.append(prf_from_multisets(gt_counter, relabeled))

    weighted = sum(t * r.f1 for t, r in zip(thresholds, results)) / sum(thresholds)
    return IouAdjacencyResult(thresholds, tuple(results), weighted)


def relation_endpoints(relations: Iterable[AdjacencyRelation]) -> set:
    out = set()
    for r in relations:
        out.add(r.from_key)
        out.add(r.to_key)
    return out


__all__ = [
    "AdjacencyRelation",
    "DEFAULT_THRESHOLDS",
    "HORIZONTAL",
    "IouAdjacencyResult",
    "PRF",
    "VERTICAL",
    "adjacency_iou_weighted_f1",
    "adjacency_text",
    "adjacency_text_prf",
    "extract_relations",
    "map_cells_by_iou",
    "prf_from_multisets",
    "relation_endpoints",
    "text_relations",
]
