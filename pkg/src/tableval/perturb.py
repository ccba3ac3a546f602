"""Deterministic table corruptions and metric sensitivity sweeps.

Randomized choices use SplitMix64 seeded with the perturbation seed; a draw
in ``[0, n)`` is ``next() % n``. The same seed, parameters and input always
produce the same output table, in any implementation following this rule.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Iterable, Optional, Sequence

from .model import BBox, Cell, RowGroup, TableError, TableTree, build_tree

KINDS = ("drop_row", "drop_empty_row", "translate_bboxes", "scale_bboxes", "corrupt_text", "blank_cells")

# printable ASCII without whitespace
ALPHABET = "".join(chr(c) for c in range(33, 127))

MIN_EXTENT = 1.0

_MASK64 = (1 << 64) - 1


class PerturbationError(ValueError):
    pass


class OutOfRange(PerturbationError):
    pass


class InvalidParam(PerturbationError):
    pass


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        return self.next() % n


@dataclass(frozen=True)
class Perturbation:
    """A corruption ``kind`` with its parameters.

    Parameters per kind:

    - drop_row: ``row``
    - drop_empty_row: ``row`` (optional; a seeded pick among all-empty rows)
    - translate_bboxes: ``dx``, ``dy``
    - scale_bboxes: ``factor`` (about each box centre)
    - corrupt_text: ``k`` characters substituted per non-empty cell
    - blank_cells: any of ``match`` (exact text), ``cells`` (list of
      ``[row, col]`` anchors), ``fraction`` (seeded share of non-empty cells)
    """

    kind: str
    params: dict = field(default_factory=dict, hash=False)
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidParam(f"unknown perturbation kind {self.kind!r}; expected one of {', '.join(KINDS)}")

    def with_param(self, name: str, value) -> "Perturbation":
        return replace(self, params={**self.params, name: value})


def _rebuild(tree: TableTree, cells: Iterable[Cell], groups=None, n_rows=None) -> TableTree:
    cells = sorted(cells, key=lambda c: (c.row, c.col))
    return build_tree(cells, tree.row_groups if groups is None else groups, tree.n_rows if n_rows is None else n_rows)


def _remove_row(tree: TableTree, row: int) -> TableTree:
    cells = []
    for c in tree.cells:
        if c.row <= row < c.row_end:
            if c.rowspan > 1:
                cells.append(replace(c, row=min(c.row, row), rowspan=c.rowspan - 1))
        elif c.row > row:
            cells.append(replace(c, row=c.row - 1))
        else:
            cells.append(c)
    groups = []
    for g in tree.row_groups:
        rows = [r - (r > row) for r in g.rows if r != row]
        if rows:
            groups.append(RowGroup(g.kind, tuple(rows)))
    return _rebuild(tree, cells, groups, tree.n_rows - 1)


def _check_row(tree: TableTree, row) -> int:
    if isinstance(row, bool) or not isinstance(row, int):
        raise InvalidParam(f"row must be an integer, got {row!r}")
    if not 0 <= row < tree.n_rows:
        raise OutOfRange(f"row {row} out of range for a table with {tree.n_rows} rows")
    return row


def _row_is_empty(tree: TableTree, row: int) -> bool:
    return all(c.is_empty for c in tree.cells if c.row <= row < c.row_end)


def _drop_row(tree, params, rng):
    return _remove_row(tree, _check_row(tree, params.get("row")))


def _drop_empty_row(tree, params, rng):
    row = params.get("row")
    if row is None:
        candidates = [r for r in range(tree.n_rows) if _row_is_empty(tree, r)]
        if not candidates:
            raise OutOfRange("table has no row consisting only of empty cells")
        row = candidates[rng.below(len(candidates))]
    row = _check_row(tree, row)
    if not _row_is_empty(tree, row):
        raise InvalidParam(f"row {row} holds non-empty cells")
    return _remove_row(tree, row)


def _number(params, name, default=None) -> float:
    value = params.get(name, default)
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise InvalidParam(f"{name} must be a finite number, got {value!r}")
    return float(value)


def _clamped_box(cx: float, cy: float, w: float, h: float) -> BBox:
    w = max(w, MIN_EXTENT)
    h = max(h, MIN_EXTENT)
    return BBox(cx - w / 2, cy - h / 2, cx + w / 2, cy + h / 2)


def _translate(tree, params, rng):
    dx = _number(params, "dx", 0.0)
    dy = _number(params, "dy", 0.0)
    if dx == 0.0 and dy == 0.0:
        return tree

    def move(c: Cell) -> Cell:
        if c.bbox is None:
            return c
        b = c.bbox
        return replace(c, bbox=BBox(b.x1 + dx, b.y1 + dy, b.x2 + dx, b.y2 + dy))

    return _rebuild(tree, map(move, tree.cells))


def _scale(tree, params, rng):
    factor = _number(params, "factor")
    if factor <= 0:
        raise InvalidParam(f"scale factor must be > 0, got {factor}")
    if factor == 1.0:
        return tree

    def scale(c: Cell) -> Cell:
        if c.bbox is None:
            return c
        b = c.bbox
        return replace(c, bbox=_clamped_box((b.x1 + b.x2) / 2, (b.y1 + b.y2) / 2, b.width * factor, b.height * factor))

    return _rebuild(tree, map(scale, tree.cells))


def corrupt_string(text: str, k: int, rng: SplitMix64) -> str:
    """Replace ``k`` distinct positions with different alphabet characters."""
    chars = list(text)
    positions = list(range(len(chars)))
    for _ in range(min(k, len(chars))):
        pos = positions.pop(rng.below(len(positions)))
        replacement = ALPHABET[rng.below(len(ALPHABET) - 1)]
        # skip over the original so the character always changes
        if replacement >= chars[pos] and chars[pos] in ALPHABET:
            replacement = ALPHABET[ALPHABET.index(replacement) + 1]
        chars[pos] = replacement
    return "".join(chars)


def _corrupt_text(tree, params, rng):
    k = params.get("k", 1)
    if isinstance(k, bool) or not isinstance(k, int) or k < 0:
        raise InvalidParam(f"k must be a non-negative integer, got {k!r}")
    cells = [c if c.is_empty else replace(c, text=corrupt_string(c.clean_text, k, rng)) for c in tree.cells]
    return _rebuild(tree, cells)


def _blank_cells(tree, params, rng):
    match = params.get("match")
    anchors = {tuple(a) for a in params.get("cells", ())}
    fraction = params.get("fraction")
    if fraction is not None:
        fraction = _number(params, "fraction")
        if not 0.0 <= fraction <= 1.0:
            raise InvalidParam(f"fraction must lie in [0, 1], got {fraction}")
    if match is None and not anchors and fraction is None:
        raise InvalidParam("blank_cells needs one of match, cells or fraction")
    for a in anchors:
        if not any((c.row, c.col) == a for c in tree.cells):
            raise OutOfRange(f"no cell anchored at {list(a)}")

    chosen = set()
    non_empty = [i for i, c in enumerate(tree.cells) if not c.is_empty]
    if fraction is not None:
        pool = list(non_empty)
        for _ in range(round(fraction * len(pool))):
            chosen.add(pool.pop(rng.below(len(pool))))
    for i, c in enumerate(tree.cells):
        if (match is not None and c.clean_text == match) or (c.row, c.col) in anchors:
            chosen.add(i)
    cells = [replace(c, text="") if i in chosen else c for i, c in enumerate(tree.cells)]
    return _rebuild(tree, cells)


_APPLY: dict[str, Callable[[TableTree, dict, SplitMix64], TableTree]] = {
    "drop_row": _drop_row,
    "drop_empty_row": _drop_empty_row,
    "translate_bboxes": _translate,
    "scale_bboxes": _scale,
    "corrupt_text": _corrupt_text,
    "blank_cells": _blank_cells,
}

# parameter varied by a sweep when none is named
SWEEP_PARAM = {
    "drop_row": "row",
    "drop_empty_row": "row",
    "translate_bboxes": "dx",
    "scale_bboxes": "factor",
    "corrupt_text": "k",
    "blank_cells": "fraction",
}


def apply(p: Perturbation, tree: TableTree) -> TableTree:
    try:
        return _APPLY[p.kind](tree, p.params, SplitMix64(p.seed))
    except TableError as exc:  # pragma: no cover - perturbations keep grids valid
        raise PerturbationError(f"{p.kind} produced an invalid table: {exc}") from exc


@dataclass(frozen=True)
class SweepRow:
    param: Any
    metric: str
    score: float


def sensitivity_sweep(
    gt: TableTree,
    family: Perturbation,
    grid: Sequence[Any],
    metrics: Sequence[str],
    param: Optional[str] = None,
    score_fn: Optional[Callable[[TableTree, TableTree, str], float]] = None,
) -> list[SweepRow]:
    """Score ``gt`` against each perturbed copy of itself."""
    if score_fn is None:
        from .evaluate import metric_score

        score_fn = metric_score
    name = param or SWEEP_PARAM[family.kind]
    rows = []
    for value in grid:
        pred = apply(family.with_param(name, value), gt)
        for metric in metrics:
            rows.append(SweepRow(value, metric, score_fn(gt, pred, metric)))
    return rows


def sweep_to_csv(rows: Iterable[SweepRow], out=None) -> str:
    buffer = out if out is not None else io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["param", "metric", "score"])
    for row in rows:
        writer.writerow([row.param, row.metric, f"{row.score:.4f}"])
    return buffer.getvalue() if out is None else ""
