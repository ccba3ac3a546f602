"""Intersection over union for cell boxes."""

from __future__ import annotations

from .model import BBox


def intersection_area(a: BBox, b: BBox) -> float:
    w = min(a.x2, b.x2) - max(a.x1, b.x1)
    h = min(a.y2, b.y2) - max(a.y1, b.y1)
    if w <= 0 or h <= 0:
        return 0.0
    return w * h


def iou(a: BBox, b: BBox) -> float:
    """Area of overlap over area of union; boxes that only touch score 0."""
    inter = intersection_area(a, b)
    if inter == 0.0:
        return 0.0
    if a == b:
        return 1.0
    union = a.area + b.area - inter
    return min(1.0, inter / union)


def iou_distance(a: BBox, b: BBox) -> float:
    """Jaccard distance ``1 - iou``; a metric on boxes with positive area."""
    return 1.0 - iou(a, b)
