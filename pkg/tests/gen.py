"""Random tables and trees for property tests."""

from __future__ import annotations

import random
from dataclasses import replace

from tableval.model import TD, BBox, Cell, Node, RowGroup, TableTree, build_tree

WORDS = ["A", "B", "C", "12", "3.4", "NA", "x", "total", "±1"]


def random_cells(
    rng: random.Random,
    max_rows: int = 5,
    max_cols: int = 5,
    empty_p: float = 0.3,
    span_p: float = 0.25,
    with_bbox: bool = True,
    cell_w: float = 40.0,
    cell_h: float = 20.0,
) -> list[Cell]:
    """Fully covered grid with random spans, texts and grid-aligned boxes."""
    n_rows = rng.randint(1, max_rows)
    n_cols = rng.randint(1, max_cols)
    taken = set()
    cells = []
    for r in range(n_rows):
        for c in range(n_cols):
            if (r, c) in taken:
                continue
            rs = rng.randint(1, n_rows - r) if rng.random() < span_p else 1
            cs = rng.randint(1, n_cols - c) if rng.random() < span_p else 1
            # shrink the span until its rectangle is free
            while any((r + dr, c + dc) in taken for dr in range(rs) for dc in range(cs)):
                if cs > 1:
                    cs -= 1
                else:
                    rs -= 1
            for dr in range(rs):
                for dc in range(cs):
                    taken.add((r + dr, c + dc))
            text = "" if rng.random() < empty_p else rng.choice(WORDS)
            bbox = None
            if with_bbox:
                bbox = BBox(c * cell_w, r * cell_h, (c + cs) * cell_w, (r + rs) * cell_h)
            cells.append(Cell(r, c, rs, cs, text, bbox))
    return cells


def random_table(rng: random.Random, groups: bool = False, **kw) -> TableTree:
    cells = random_cells(rng, **kw)
    n_rows = max(c.row_end for c in cells)
    row_groups = None
    if groups and n_rows >= 2 and rng.random() < 0.5:
        split = rng.randint(1, n_rows - 1)
        row_groups = [RowGroup("thead", tuple(range(split))), RowGroup("tbody", tuple(range(split, n_rows)))]
    return build_tree(cells, row_groups)


def jitter_boxes(rng: random.Random, tree: TableTree, amount: float = 4.0) -> TableTree:
    def move(c):
        if c.bbox is None:
            return c
        b = c.bbox
        dx1, dy1, dx2, dy2 = (rng.uniform(-amount, amount) for _ in range(4))
        x1, x2 = b.x1 + dx1, max(b.x2 + dx2, b.x1 + dx1 + 1)
        y1, y2 = b.y1 + dy1, max(b.y2 + dy2, b.y1 + dy1 + 1)
        return replace(c, bbox=BBox(x1, y1, x2, y2))

    return build_tree([move(c) for c in tree.cells], tree.row_groups, tree.n_rows)


def mutate_texts(rng: random.Random, tree: TableTree) -> TableTree:
    """New text for every non-empty cell; empty cells stay empty."""
    cells = [c if c.is_empty else replace(c, text=rng.choice(WORDS) + "~" + str(rng.randint(0, 99))) for c in tree.cells]
    return build_tree(cells, tree.row_groups, tree.n_rows)


def mutate_boxes(rng: random.Random, tree: TableTree) -> TableTree:
    cells = []
    for c in tree.cells:
        if c.bbox is None:
            cells.append(c)
        else:
            x, y = rng.uniform(0, 300), rng.uniform(0, 300)
            cells.append(replace(c, bbox=BBox(x, y, x + rng.uniform(1, 50), y + rng.uniform(1, 50))))
    return build_tree(cells, tree.row_groups, tree.n_rows)


LABELS = ["table", "tr", "td", "thead"]


def random_node_tree(rng: random.Random, max_nodes: int = 8) -> Node:
    """Arbitrary ordered tree; td-labelled nodes carry random cells."""
    n = rng.randint(1, max_nodes)
    parents = [None] + [rng.randrange(i) for i in range(1, n)]
    labels = [rng.choice(LABELS) for _ in range(n)]
    cells = []
    for _ in range(n):
        x, y = rng.randint(0, 6), rng.randint(0, 6)
        bbox = None if rng.random() < 0.2 else BBox(x, y, x + rng.randint(1, 4), y + rng.randint(1, 4))
        cells.append(Cell(0, 0, rng.choice([1, 1, 2]), rng.choice([1, 1, 2]), rng.choice(["", "ab", "abc", "b", None]), bbox))
    children = [[] for _ in range(n)]
    for i in range(1, n):
        children[parents[i]].append(i)

    def build(i):
        cell = cells[i] if labels[i] == TD else None
        return Node(labels[i], tuple(build(k) for k in children[i]), cell)

    return build(0)
