"""Tree edit distance based similarity (TEDS) for table trees.

The distance is the classic Zhang-Shasha ordered tree edit distance with
pluggable insert/delete/substitute costs. Two cost models are provided:
``teds_text_cost`` compares cell text by normalized Levenshtein distance and
``teds_iou_cost`` compares cell boxes by IOU distance.

Arithmetic is generic: costs may be floats, ints or ``Fraction`` and the
distance comes back in the same numeric type.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

from .geometry import iou_distance
from .model import TD, Node, TableTree


@dataclass(frozen=True)
class CostModel:
    name: str
    insert_cost: Callable[[Node], float]
    delete_cost: Callable[[Node], float]
    substitute_cost: Callable[[Node, Node], float]


@dataclass(frozen=True)
class TedsScore:
    """``score`` is ``raw_score`` floored at 0.

    The raw ratio drops below 0 when no node mapping can cover the smaller
    tree cheaply, e.g. span-mismatched cells against differently shaped rows.
    """

    score: float
    edit_distance: float
    size_gt: int
    size_pred: int

    @property
    def raw_score(self) -> float:
        return 1.0 - float(self.edit_distance) / max(self.size_gt, self.size_pred)

    def as_dict(self) -> dict:
        return {
            "score": self.score,
            "raw_score": self.raw_score,
            "edit_distance": float(self.edit_distance),
            "size_gt": self.size_gt,
            "size_pred": self.size_pred,
        }


def levenshtein(a: str, b: str) -> int:
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        current = [i]
        for j, cb in enumerate(b, 1):
            current.append(min(previous[j] + 1, current[j - 1] + 1, previous[j - 1] + (ca != cb)))
        previous = current
    return previous[-1]


def normalized_levenshtein(a: str, b: str) -> float:
    return levenshtein(a, b) / max(len(a), len(b), 1)


def _unit(_node) -> int:
    return 1


def _structural_cost(a: Node, b: Node):
    """Cost shared by both models when at least one side is not a td.

    Returns None when both nodes are td and the cell payloads decide.
    """
    a_td = a.label == TD
    b_td = b.label == TD
    if not a_td and not b_td:
        return 0 if a.label == b.label else 1
    if a_td != b_td:
        return 1
    ca, cb = a.cell, b.cell
    if ca.rowspan != cb.rowspan or ca.colspan != cb.colspan:
        return 1
    return None


def _text_substitute(a: Node, b: Node):
    cost = _structural_cost(a, b)
    if cost is not None:
        return cost
    return normalized_levenshtein(a.cell.clean_text, b.cell.clean_text)


def _iou_substitute(a: Node, b: Node):
    cost = _structural_cost(a, b)
    if cost is not None:
        return cost
    ba, bb = a.cell.bbox, b.cell.bbox
    if ba is not None and bb is not None:
        return iou_distance(ba, bb)
    if ba is None and bb is None:
        return 0
    return 1


def teds_text_cost() -> CostModel:
    return CostModel("teds-text", _unit, _unit, _text_substitute)


def teds_iou_cost() -> CostModel:
    return CostModel("teds-iou", _unit, _unit, _iou_substitute)


def unit_cost() -> CostModel:
    """Label-only costs: 0 for equal labels, 1 otherwise."""
    return CostModel("unit", _unit, _unit, lambda a, b: 0 if a.label == b.label else 1)


class _Indexed:
    """Postorder numbering with leftmost-leaf descendants and keyroots."""

    def __init__(self, root: Node):
        self.nodes: list[Node] = []
        self.lmld: list[int] = []
        # frame: [node, child iterator, leftmost leaf index once the first child is done]
        frames = [[root, iter(root.children), None]]
        while frames:
            frame = frames[-1]
            child = next(frame[1], None)
            if child is not None:
                frames.append([child, iter(child.children), None])
                continue
            frames.pop()
            index = len(self.nodes)
            self.nodes.append(frame[0])
            leftmost = index if frame[2] is None else frame[2]
            self.lmld.append(leftmost)
            if frames and frames[-1][2] is None:
                frames[-1][2] = leftmost
        seen = {}
        for i, l in enumerate(self.lmld):
            seen[l] = i
        self.keyroots = sorted(seen.values())


def tree_edit_distance(a: Union[TableTree, Node], b: Union[TableTree, Node], cost: CostModel):
    """Minimum total cost of edits turning ``a`` into ``b`` (Zhang-Shasha).

    Time is O(|a| |b| min(depth, leaves)^2) per tree, memory O(|a| |b|).
    """
    ta = _Indexed(a.root if isinstance(a, TableTree) else a)
    tb = _Indexed(b.root if isinstance(b, TableTree) else b)
    na, nb = len(ta.nodes), len(tb.nodes)
    la, lb = ta.lmld, tb.lmld

    delete = [cost.delete_cost(n) for n in ta.nodes]
    insert = [cost.insert_cost(n) for n in tb.nodes]
    subst = [[cost.substitute_cost(x, y) for y in tb.nodes] for x in ta.nodes]
    treedist = [[0] * nb for _ in range(na)]

    for i in ta.keyroots:
        li = la[i]
        rows = i - li + 2
        leaf_a = li == i
        for j in tb.keyroots:
            lj = lb[j]
            if leaf_a and lj == j:
                treedist[i][j] = min(delete[i] + insert[j], subst[i][j])
                continue
            cols = j - lj + 2
            fd = [[0] * cols for _ in range(rows)]
            for x in range(1, rows):
                fd[x][0] = fd[x - 1][0] + delete[li + x - 1]
            first = fd[0]
            for y in range(1, cols):
                first[y] = first[y - 1] + insert[lj + y - 1]
            for x in range(1, rows):
                ia = li + x - 1
                del_a = delete[ia]
                row_prev = fd[x - 1]
                row = fd[x]
                sub_row = subst[ia]
                td_row = treedist[ia]
                whole_a = la[ia] == li
                for y in range(1, cols):
                    jb = lj + y - 1
                    if whole_a and lb[jb] == lj:
                        d = min(row_prev[y] + del_a, row[y - 1] + insert[jb], row_prev[y - 1] + sub_row[jb])
                        row[y] = d
                        td_row[jb] = d
                    else:
                        row[y] = min(
                            row_prev[y] + del_a,
                            row[y - 1] + insert[jb],
                            fd[la[ia] - li][lb[jb] - lj] + td_row[jb],
                        )
    return treedist[na - 1][nb - 1]


def teds(gt: Union[TableTree, Node], pred: Union[TableTree, Node], cost: CostModel) -> TedsScore:
    """Similarity ``max(0, 1 - distance / max(|gt|, |pred|))``."""
    size_gt = gt.size if isinstance(gt, TableTree) else gt.size()
    size_pred = pred.size if isinstance(pred, TableTree) else pred.size()
    distance = tree_edit_distance(gt, pred, cost)
    return TedsScore(max(0.0, 1.0 - float(distance) / max(size_gt, size_pred)), distance, size_gt, size_pred)


def teds_text(gt: TableTree, pred: TableTree) -> TedsScore:
    return teds(gt, pred, teds_text_cost())


def teds_iou(gt: TableTree, pred: TableTree) -> TedsScore:
    return teds(gt, pred, teds_iou_cost())
