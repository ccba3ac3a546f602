"""Exit criteria for the package, one test per criterion.

Each test prints its PASS/FAIL line in the "acceptance criteria" section of
the pytest summary.
"""

import json
import random
import time
from fractions import Fraction

import pytest

from gen import jitter_boxes, mutate_boxes, mutate_texts, random_cells, random_node_tree, random_table
from oracles import adjacency_by_pairs, pixel_iou, ted_by_mappings
from tableval.adjacency import adjacency_iou_weighted_f1, adjacency_text, extract_relations
from tableval.cli import run_cli
from tableval.evaluate import metric_score
from tableval.fixtures import grid_table, missed_row_pair, ocr_noise_pair
from tableval.geometry import iou, iou_distance
from tableval.ingest import Document, write_document
from tableval.model import BBox, build_grid, build_tree
from tableval.teds import CostModel, teds, teds_iou_cost, teds_text_cost, tree_edit_distance, unit_cost

criterion = pytest.mark.criterion


def exact(cost: CostModel) -> CostModel:
    return CostModel(
        cost.name,
        lambda n: Fraction(cost.insert_cost(n)),
        lambda n: Fraction(cost.delete_cost(n)),
        lambda a, b: Fraction(cost.substitute_cost(a, b)),
    )


def random_cost_model(rng: random.Random) -> CostModel:
    """One of unit/text/IOU, optionally with random positive insert/delete weights."""
    base = rng.choice([unit_cost(), teds_text_cost(), teds_iou_cost()])
    if rng.random() < 0.5:
        return exact(base)
    w_ins = Fraction(rng.randint(1, 4), 2)
    w_del = Fraction(rng.randint(1, 4), 2)
    return CostModel(
        base.name + "-weighted",
        lambda n: w_ins,
        lambda n: w_del,
        lambda a, b: Fraction(base.substitute_cost(a, b)),
    )


@criterion("1. TED oracle equivalence: 1000 random pairs <= 8 nodes, exact, < 60 s")
def test_ted_oracle_equivalence():
    rng = random.Random(1001)
    start = time.perf_counter()
    for _ in range(1000):
        a = random_node_tree(rng, 8)
        b = random_node_tree(rng, 8)
        cost = random_cost_model(rng)
        assert a.size() <= 8 and b.size() <= 8
        assert tree_edit_distance(a, b, cost) == ted_by_mappings(a, b, cost)
    assert time.perf_counter() - start < 60.0


@criterion("2. TEDS identity on 500 tables and range [0, 1] on 500 pairs, both cost models")
def test_teds_identity_and_range():
    rng = random.Random(1002)
    models = (teds_text_cost(), teds_iou_cost())
    for _ in range(500):
        t = random_table(rng, groups=True, max_rows=6, max_cols=6)
        for cost in models:
            assert teds(t, t, cost).score == 1.0
    for _ in range(500):
        a = random_table(rng, groups=True, max_rows=6, max_cols=6)
        b = mutate_texts(rng, jitter_boxes(rng, random_table(rng, groups=True, max_rows=6, max_cols=6), 15.0))
        for cost in models:
            assert 0.0 <= teds(a, b, cost).score <= 1.0


def random_int_box(rng, hi):
    x1, y1 = rng.randint(0, hi - 1), rng.randint(0, hi - 1)
    return BBox(x1, y1, rng.randint(x1 + 1, hi), rng.randint(y1 + 1, hi))


@criterion("3. IOU distance axioms on 10000 triples in [0,64]^2; pixel oracle on 1000 boxes in [0,32]^2")
def test_iou_axioms():
    rng = random.Random(1003)
    for i in range(10_000):
        a, b, c = (random_int_box(rng, 64) for _ in range(3))
        if i % 10 == 0:
            b = a  # exercise the identity direction
        assert (iou_distance(a, b) == 0.0) == (a == b)
        assert iou_distance(a, a) == 0.0
        assert iou_distance(a, b) == iou_distance(b, a)
        assert iou_distance(a, c) <= iou_distance(a, b) + iou_distance(b, c) + 1e-12
    for _ in range(1000):
        a, b = random_int_box(rng, 32), random_int_box(rng, 32)
        exact_ratio = pixel_iou(a, b)
        assert iou(a, b) == float(exact_ratio)


@criterion("4. Missed-row fixture: adj-text recall 1, precision < 1; TEDS text and IOU < 1 (golden values)")
def test_missed_row_fixture():
    gt, pred = missed_row_pair()
    prf = adjacency_text(gt, pred)
    assert prf.recall == 1.0
    assert prf.precision < 1.0
    # golden values: 9 gt relations all recovered, one extra (C, A, horizontal)
    assert (prf.tp, prf.fp, prf.fn) == (9, 1, 0)
    assert prf.precision == 0.9
    assert prf.f1 == pytest.approx(18 / 19, abs=1e-12)
    # |gt| = 1 + 3 tr + 12 td = 16, |pred| = 1 + 2 tr + 8 td = 11; 5 deletions plus one '' -> 'C' substitution
    text = teds(gt, pred, teds_text_cost())
    geo = teds(gt, pred, teds_iou_cost())
    assert (text.size_gt, text.size_pred) == (16, 11)
    assert text.edit_distance == 6 and text.score == pytest.approx(10 / 16, abs=1e-12)
    assert geo.edit_distance == 6 and geo.score == pytest.approx(10 / 16, abs=1e-12)
    assert text.score < 1.0 and geo.score < 1.0


@criterion("5. OCR-noise fixture ordering: adj-text < adj-iou, adj-text < teds-text < teds-iou, margin >= 0.01")
def test_ocr_noise_ordering():
    gt, pred = ocr_noise_pair()
    s = {m: metric_score(gt, pred, m) for m in ("adj-text", "adj-iou", "teds-text", "teds-iou")}
    print(" ".join(f"{k}={v:.4f}" for k, v in s.items()))
    assert s["adj-iou"] - s["adj-text"] >= 0.01
    assert s["teds-text"] - s["adj-text"] >= 0.01
    assert s["teds-iou"] - s["teds-text"] >= 0.01


@criterion("6. Text/geometry independence over 100 random tables, bit-identical")
def test_independence():
    rng = random.Random(1006)
    for _ in range(100):
        gt = random_table(rng, max_rows=5, max_cols=5)
        pred = jitter_boxes(rng, random_table(rng, max_rows=5, max_cols=5), 6.0)
        retexted = mutate_texts(rng, pred)
        reboxed = mutate_boxes(rng, pred)
        for metric in ("adj-iou", "teds-iou"):
            assert metric_score(gt, retexted, metric) == metric_score(gt, pred, metric)
            assert metric_score(mutate_texts(rng, gt), pred, metric) == metric_score(gt, pred, metric)
        for metric in ("adj-text", "teds-text"):
            assert metric_score(gt, reboxed, metric) == metric_score(gt, pred, metric)
            assert metric_score(mutate_boxes(rng, gt), pred, metric) == metric_score(gt, pred, metric)


@criterion("7. Adjacency extraction equals brute-force oracle on 500 tables <= 5x5, spans, 30% empty")
def test_adjacency_oracle():
    rng = random.Random(1007)
    for _ in range(500):
        cells = random_cells(rng, max_rows=5, max_cols=5, empty_p=0.3, span_p=0.3)
        got = {tuple(r) for r in extract_relations(build_grid(cells), cells)}
        assert got == adjacency_by_pairs(cells)


@criterion("8. Shrink-to-IOU-0.75 fixture: weighted F1 = 13/30 +- 1e-9")
def test_weighted_average_fixture():
    gt = grid_table([["a", "b", "c"], ["d", "e", "f"]], col_widths=[40.0, 40.0, 40.0])
    shrunk = []
    for cell in gt.cells:
        b = cell.bbox
        shrunk.append(cell.__class__(cell.row, cell.col, 1, 1, cell.text, BBox(b.x1, b.y1, b.x1 + 0.75 * b.width, b.y2)))
    pred = build_tree(shrunk)
    assert all(iou(g.bbox, p.bbox) == 0.75 for g, p in zip(gt.cells, pred.cells))
    result = adjacency_iou_weighted_f1(gt, pred)
    assert [p.f1 for p in result.per_threshold] == [1.0, 1.0, 0.0, 0.0]
    assert abs(result.weighted_f1 - 13 / 30) <= 1e-9


@criterion("9. 50-table corpus: --jobs 1 and --jobs 8 reports byte-identical, each run < 10 s")
def test_determinism_across_workers(tmp_path):
    rng = random.Random(1009)
    gt_tables, pred_tables = [], []
    for i in range(50):
        tree = random_table(rng, groups=True, max_rows=8, max_cols=6, cell_w=60.0, cell_h=24.0)
        table_id = f"table-{rng.randint(0, 10**6):07d}"
        gt_tables.append((table_id, tree))
        if i % 17 != 5:
            pred_tables.append((table_id, mutate_texts(rng, jitter_boxes(rng, tree, 5.0))))
    pred_tables.append(("stray", gt_tables[0][1]))
    write_document(Document(tuple(gt_tables)), tmp_path / "gt.json")
    write_document(Document(tuple(pred_tables)), tmp_path / "pred.json")

    outputs = []
    for jobs in ("1", "8", "1"):
        out = tmp_path / f"report-{jobs}-{len(outputs)}.json"
        start = time.perf_counter()
        code = run_cli(["evaluate", "--gt", str(tmp_path / "gt.json"), "--pred", str(tmp_path / "pred.json"),
                        "--jobs", jobs, "--output", str(out)])
        elapsed = time.perf_counter() - start
        assert code == 0
        assert elapsed < 10.0, f"--jobs {jobs} took {elapsed:.2f}s"
        outputs.append(out.read_bytes())
    assert outputs[0] == outputs[1] == outputs[2]
    report = json.loads(outputs[0])
    assert len(report["per_table"]) == 50
    assert report["skipped"] == [{"table_id": "stray", "reason": "unmatched prediction"}]
