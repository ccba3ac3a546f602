"""Table structure recognition metrics: adjacency-relation F1 and TEDS, text and IOU variants."""

from .adjacency import PRF, adjacency_iou_weighted_f1, adjacency_text, extract_relations, map_cells_by_iou
from .evaluate import METRICS, MetricReport, Options, evaluate_corpus
from .geometry import iou, iou_distance
from .ingest import Document, parse_html_table, parse_json_document, read_document, write_document
from .model import BBox, Cell, TableGrid, TableTree, build_grid, build_tree, tree_size
from .teds import CostModel, TedsScore, teds, teds_iou, teds_iou_cost, teds_text, teds_text_cost, tree_edit_distance

__all__ = [
    "BBox",
    "Cell",
    "CostModel",
    "Document",
    "METRICS",
    "MetricReport",
    "Options",
    "PRF",
    "TableGrid",
    "TableTree",
    "TedsScore",
    "adjacency_iou_weighted_f1",
    "adjacency_text",
    "build_grid",
    "build_tree",
    "evaluate_corpus",
    "extract_relations",
    "iou",
    "iou_distance",
    "map_cells_by_iou",
    "parse_html_table",
    "parse_json_document",
    "read_document",
    "teds",
    "teds_iou",
    "teds_iou_cost",
    "teds_text",
    "teds_text_cost",
    "tree_edit_distance",
    "tree_size",
    "write_document",
]
