"""Table domain types: boxes, cells, HTML-shaped table trees and occupancy grids."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Optional, Sequence

TABLE = "table"
THEAD = "thead"
TBODY = "tbody"
TR = "tr"
TD = "td"

ROW_GROUP_LABELS = (THEAD, TBODY)
LABELS = (TABLE, THEAD, TBODY, TR, TD)


class TableError(ValueError):
    """Base class for invalid table structures."""


class OverlapError(TableError):
    def __init__(self, first: "Cell", second: "Cell", position: tuple[int, int]):
        self.first = first
        self.second = second
        self.position = position
        super().__init__(
            f"cells anchored at ({first.row},{first.col}) and ({second.row},{second.col}) "
            f"both cover grid position {position}"
        )


@dataclass(frozen=True)
class BBox:
    """Axis-aligned box in top-left-origin pixel coordinates."""

    x1: float
    y1: float
    x2: float
    y2: float

    def __post_init__(self):
        for name in ("x1", "y1", "x2", "y2"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise TableError(f"bbox {name} must be a number, got {value!r}")
            if not math.isfinite(value):
                raise TableError(f"bbox {name} must be finite, got {value!r}")
            object.__setattr__(self, name, float(value))
        if not (self.x2 > self.x1 and self.y2 > self.y1):
            raise TableError(f"degenerate bbox {self.as_list()}")

    @classmethod
    def of(cls, coords: Sequence[float]) -> "BBox":
        if len(coords) != 4:
            raise TableError(f"bbox needs 4 coordinates, got {len(coords)}")
        return cls(*coords)

    @property
    def width(self) -> float:
        return self.x2 - self.x1

    @property
    def height(self) -> float:
        return self.y2 - self.y1

    @property
    def area(self) -> float:
        return self.width * self.height

    def as_list(self) -> list[float]:
        return [self.x1, self.y1, self.x2, self.y2]


@dataclass(frozen=True)
class Cell:
    row: int
    col: int
    rowspan: int = 1
    colspan: int = 1
    text: Optional[str] = None
    bbox: Optional[BBox] = None

    def __post_init__(self):
        for name in ("row", "col", "rowspan", "colspan"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int):
                raise TableError(f"cell {name} must be an integer, got {value!r}")
        if self.row < 0 or self.col < 0:
            raise TableError(f"negative cell anchor ({self.row},{self.col})")
        if self.rowspan < 1 or self.colspan < 1:
            raise TableError(
                f"cell ({self.row},{self.col}) has span {self.rowspan}x{self.colspan}; spans must be >= 1"
            )

    @property
    def is_empty(self) -> bool:
        """Absent or whitespace-only text."""
        return self.text is None or not self.text.strip()

    @property
    def clean_text(self) -> str:
        return "" if self.text is None else self.text.strip()

    @property
    def row_end(self) -> int:
        return self.row + self.rowspan

    @property
    def col_end(self) -> int:
        return self.col + self.colspan

    def positions(self) -> Iterator[tuple[int, int]]:
        for r in range(self.row, self.row_end):
            for c in range(self.col, self.col_end):
                yield r, c


@dataclass(frozen=True)
class Node:
    """Ordered tree node. ``cell`` is set on td nodes only."""

    label: str
    children: tuple["Node", ...] = ()
    cell: Optional[Cell] = None

    def iter_preorder(self) -> Iterator["Node"]:
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def size(self) -> int:
        return sum(1 for _ in self.iter_preorder())


@dataclass(frozen=True)
class RowGroup:
    kind: str
    rows: tuple[int, ...]

    def __post_init__(self):
        if self.kind not in ROW_GROUP_LABELS:
            raise TableError(f"row group kind must be thead or tbody, got {self.kind!r}")
        object.__setattr__(self, "rows", tuple(self.rows))
        if not self.rows:
            raise TableError(f"empty {self.kind} row group")
        if list(self.rows) != list(range(self.rows[0], self.rows[0] + len(self.rows))):
            raise TableError(f"{self.kind} rows must be consecutive and ascending, got {list(self.rows)}")


@dataclass(frozen=True)
class TableGrid:
    n_rows: int
    n_cols: int
    # (row, col) -> index into the cell list the grid was built from
    occupancy: dict = field(hash=False)

    def at(self, row: int, col: int) -> Optional[int]:
        return self.occupancy.get((row, col))

    @property
    def shape(self) -> tuple[int, int]:
        return self.n_rows, self.n_cols


def build_grid(cells: Sequence[Cell]) -> TableGrid:
    occupancy: dict[tuple[int, int], int] = {}
    n_rows = n_cols = 0
    for index, cell in enumerate(cells):
        for pos in cell.positions():
            other = occupancy.get(pos)
            if other is not None:
                raise OverlapError(cells[other], cell, pos)
            occupancy[pos] = index
        n_rows = max(n_rows, cell.row_end)
        n_cols = max(n_cols, cell.col_end)
    return TableGrid(n_rows, n_cols, occupancy)


def check_declared_shape(grid: TableGrid, n_rows: int, n_cols: int) -> None:
    """Raise if an externally declared shape disagrees with the derived one."""
    if grid.shape != (n_rows, n_cols):
        raise TableError(f"declared shape {n_rows}x{n_cols} but cells span {grid.n_rows}x{grid.n_cols}")


class TableTree:
    """Immutable table tree: table -> [thead|tbody] -> tr -> td.

    Construct through :func:`build_tree` (or :meth:`from_root` for trees
    assembled elsewhere); the structure is validated either way.
    """

    def __init__(self, root: Node):
        _validate_root(root)
        self.root = root

    @classmethod
    def from_root(cls, root: Node) -> "TableTree":
        return cls(root)

    def __eq__(self, other):
        if not isinstance(other, TableTree):
            return NotImplemented
        return self.root == other.root

    def __hash__(self):
        return hash(self.root)

    def __repr__(self):
        return f"TableTree(rows={self.n_rows}, cells={len(self.cells)}, nodes={self.size})"

    @cached_property
    def size(self) -> int:
        return self.root.size()

    @cached_property
    def cells(self) -> tuple[Cell, ...]:
        return tuple(n.cell for n in self.root.iter_preorder() if n.label == TD)

    @cached_property
    def n_rows(self) -> int:
        return sum(1 for n in self.root.iter_preorder() if n.label == TR)

    @cached_property
    def row_groups(self) -> tuple[RowGroup, ...]:
        groups = []
        row = 0
        for child in self.root.children:
            if child.label == TR:
                row += 1
            else:
                groups.append(RowGroup(child.label, tuple(range(row, row + len(child.children)))))
                row += len(child.children)
        return tuple(groups)

    @cached_property
    def grid(self) -> TableGrid:
        return build_grid(self.cells)

    @property
    def has_geometry(self) -> bool:
        return any(c.bbox is not None for c in self.cells)


def _validate_root(root: Node) -> None:
    if root.label != TABLE:
        raise TableError(f"root must be a table node, got {root.label!r}")
    if root.cell is not None:
        raise TableError("table node cannot carry a cell")
    row = 0
    for child in root.children:
        if child.label in ROW_GROUP_LABELS:
            if child.cell is not None:
                raise TableError(f"{child.label} node cannot carry a cell")
            if not child.children:
                raise TableError(f"empty {child.label} row group")
            rows = child.children
        elif child.label == TR:
            rows = (child,)
        else:
            raise TableError(f"table children must be tr/thead/tbody, got {child.label!r}")
        for tr in rows:
            if tr.label != TR or tr.cell is not None:
                raise TableError(f"row groups may only contain tr nodes, got {tr.label!r}")
            for td in tr.children:
                if td.label != TD or td.cell is None:
                    raise TableError("tr children must be td nodes carrying a cell")
                if td.children:
                    raise TableError("td nodes must be leaves")
                if td.cell.row != row:
                    raise TableError(f"cell anchored in row {td.cell.row} placed under tr #{row}")
            row += 1


def build_tree(
    cells: Iterable[Cell],
    row_groups: Optional[Sequence[RowGroup]] = None,
    n_rows: Optional[int] = None,
) -> TableTree:
    """Assemble cells (row-major order) into a table tree.

    One tr is emitted per grid row, including rows that only hold the
    continuation of spans from above. ``n_rows`` may extend the table with
    trailing cell-less rows.
    """
    cells = list(cells)
    seen: set[tuple[int, int]] = set()
    prev: Optional[Cell] = None
    for cell in cells:
        anchor = (cell.row, cell.col)
        if anchor in seen:
            raise TableError(f"duplicate cell anchor {anchor}")
        seen.add(anchor)
        if prev is not None:
            if cell.row < prev.row:
                raise TableError(f"cells not grouped row-major: row {cell.row} follows row {prev.row}")
            if cell.row == prev.row and cell.col <= prev.col:
                raise TableError(
                    f"non-monotone column anchors in row {cell.row}: {cell.col} follows {prev.col}"
                )
        prev = cell

    extent = max((c.row_end for c in cells), default=0)
    if n_rows is None:
        n_rows = extent
    elif n_rows < extent:
        raise TableError(f"n_rows={n_rows} is smaller than the span extent {extent}")

    by_row: list[list[Node]] = [[] for _ in range(n_rows)]
    for cell in cells:
        by_row[cell.row].append(Node(TD, (), cell))
    trs = [Node(TR, tuple(tds)) for tds in by_row]

    group_at: dict[int, RowGroup] = {}
    covered: set[int] = set()
    for group in row_groups or ():
        if group.rows[-1] >= n_rows:
            raise TableError(f"{group.kind} references row {group.rows[-1]} but the table has {n_rows} rows")
        if covered.intersection(group.rows):
            raise TableError(f"row groups overlap on rows {sorted(covered.intersection(group.rows))}")
        covered.update(group.rows)
        group_at[group.rows[0]] = group

    children = []
    row = 0
    while row < n_rows:
        group = group_at.get(row)
        if group is None:
            children.append(trs[row])
            row += 1
        else:
            children.append(Node(group.kind, tuple(trs[r] for r in group.rows)))
            row += len(group.rows)
    return TableTree(Node(TABLE, tuple(children)))


def tree_size(tree: TableTree | Node) -> int:
    """Node count including table/thead/tbody/tr nodes."""
    if isinstance(tree, TableTree):
        return tree.size
    return tree.size()


def flatten_row_groups(tree: TableTree) -> TableTree:
    """Drop thead/tbody wrappers, keeping rows in document order."""
    if not tree.row_groups:
        return tree
    return build_tree(tree.cells, None, tree.n_rows)


def with_cells(tree: TableTree, cells: Sequence[Cell]) -> TableTree:
    """Rebuild ``tree`` with replacement cells, keeping its row layout."""
    return build_tree(cells, tree.row_groups, max(tree.n_rows, max((c.row_end for c in cells), default=0)))


def map_cells(tree: TableTree, fn) -> TableTree:
    """Apply ``fn(cell) -> cell`` to every cell; anchors and spans must be kept."""
    return with_cells(tree, [fn(c) for c in tree.cells])


__all__ = [
    "BBox",
    "Cell",
    "Node",
    "OverlapError",
    "RowGroup",
    "TableError",
    "TableGrid",
    "TableTree",
    "build_grid",
    "build_tree",
    "check_declared_shape",
    "flatten_row_groups",
    "map_cells",
    "tree_size",
    "with_cells",
]
