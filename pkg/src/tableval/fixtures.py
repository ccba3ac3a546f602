"""Built-in ground-truth/prediction pairs illustrating metric blind spots.

``missed_row_pair``: the prediction loses a row made of one text cell and
three empty cells, and the text cell slides into the empty first slot of the
row below. Four empty cells disappear and a single new horizontal relation
(C, A) appears, so adjacency recall stays perfect.

``ocr_noise_pair``: the prediction has (almost) the right cell geometry but
its OCR turned every "±" into "+" and read the "NA" cells as empty.
"""

from __future__ import annotations

from dataclasses import replace
from typing import Optional, Sequence

from .model import BBox, Cell, TableTree, build_tree
from .perturb import Perturbation, apply


def grid_table(
    rows: Sequence[Sequence[Optional[str]]],
    col_widths: Optional[Sequence[float]] = None,
    row_height: float = 20.0,
    origin: tuple[float, float] = (10.0, 10.0),
) -> TableTree:
    """Span-free table whose cell boxes tile a regular grid."""
    n_cols = max((len(r) for r in rows), default=0)
    widths = list(col_widths) if col_widths is not None else [60.0] * n_cols
    lefts = [origin[0]]
    for w in widths:
        lefts.append(lefts[-1] + w)
    cells = []
    for r, row in enumerate(rows):
        top = origin[1] + r * row_height
        for c, text in enumerate(row):
            cells.append(Cell(r, c, 1, 1, text, BBox(lefts[c], top, lefts[c + 1], top + row_height)))
    return build_tree(cells)


def missed_row_pair() -> tuple[TableTree, TableTree]:
    gt = grid_table(
        [
            ["H1", "H2", "H3", "H4"],
            ["C", "", "", ""],
            ["", "A", "B", "D"],
        ]
    )
    by_anchor = {(c.row, c.col): c for c in gt.cells}
    merged = [replace(by_anchor[(1, 0)], row=1)] + [by_anchor[(2, c)] for c in (1, 2, 3)]
    merged = [replace(c, row=1) for c in merged]
    pred = build_tree([by_anchor[(0, c)] for c in range(4)] + merged)
    return gt, pred


OCR_TABLE = [
    ["Characteristic", "Treatment", "Control", "P value"],
    ["Age, years", "54.2 ± 8.1", "55.0 ± 7.9", "0.41"],
    ["BMI, kg/m2", "27.3 ± 4.2", "26.8 ± 3.9", "0.37"],
    ["SBP, mmHg", "132 ± 15", "129 ± 14", "0.12"],
    ["HbA1c, %", "7.1 ± 1.2", "NA", "NA"],
    ["LDL, mg/dL", "118 ± 31", "121 ± 29", "0.55"],
    ["Follow-up, mo", "NA", "24.5 ± 6.0", "NA"],
    ["eGFR", "81 ± 17", "79 ± 18", "0.48"],
]
OCR_COL_WIDTHS = [130.0, 90.0, 90.0, 60.0]


def ocr_noise_pair(scale: float = 0.96) -> tuple[TableTree, TableTree]:
    gt = grid_table(OCR_TABLE, OCR_COL_WIDTHS)
    pred = apply(Perturbation("blank_cells", {"match": "NA"}), gt)
    pred = apply(Perturbation("scale_bboxes", {"factor": scale}), pred)
    cells = [c if c.is_empty else replace(c, text=c.text.replace("±", "+")) for c in pred.cells]
    return gt, build_tree(cells)
