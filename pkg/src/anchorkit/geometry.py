"""Axis-aligned box arithmetic: areas, intersections, IoU, aspect ratio, and
the best-possible intersection of two box shapes under free placement.

Boxes are real-valued: annotation files carry integers, but crops and resizes
produce fractional coordinates, and integer quantization would distort IoU
values. Aspect ratio follows the height-over-width convention throughout
(a box of width w and aspect ratio r has height w * r).
"""

from __future__ import annotations

from dataclasses import dataclass

# Absolute tolerance for area comparisons, in px^2.
ABS_TOL = 1e-9


@dataclass(frozen=True)
class Box:
    """Axis-aligned rectangle: top-left corner plus width and height, in px.

    Construction is deliberately permissive (annotation parsers must be able
    to hold degenerate zero-area boxes and flag them); every geometric
    operation validates its inputs and rejects non-positive dimensions.
    """

    x: float
    y: float
    w: float
    h: float

    @property
    def x2(self) -> float:
        return self.x + self.w

    @property
    def y2(self) -> float:
        return self.y + self.h

    @property
    def cx(self) -> float:
        return self.x + self.w / 2.0

    @property
    def cy(self) -> float:
        return self.y + self.h / 2.0

    @property
    def area(self) -> float:
        return self.w * self.h

    def is_valid(self) -> bool:
        return self.w > 0 and self.h > 0


def _check_valid(box: Box) -> None:
    if not box.is_valid():
        raise ValueError(f"invalid box (non-positive dimensions): {box}")


def aspect_ratio(box: Box) -> float:
    """Height divided by width."""
    _check_valid(box)
    return box.h / box.w


def intersection_area(a: Box, b: Box) -> float:
    """Overlap area of two boxes; zero when they are disjoint.

    Each axis overlap is clamped by both boxes' extents: the subtraction of
    rounded corner coordinates can otherwise exceed the true width by an ulp,
    which would push the IoU of identical thin boxes above 1.
    """
    _check_valid(a)
    _check_valid(b)
    iw = min(a.x2, b.x2) - max(a.x, b.x)
    ih = min(a.y2, b.y2) - max(a.y, b.y)
    if iw <= 0.0 or ih <= 0.0:
        return 0.0
    return min(iw, a.w, b.w) * min(ih, a.h, b.h)


def iou(a: Box, b: Box) -> float:
    """Intersection over union, in [0, 1]. Symmetric; 1 only for identical boxes."""
    inter = intersection_area(a, b)
    return inter / (a.area + b.area - inter)


def ideal_max_intersection(
    face_w: float, face_ar: float, anchor_w: float, anchor_ar: float
) -> float:
    """Largest possible overlap of a face shape and an anchor shape.

    Each axis can overlap by at most the smaller of the two extents, and both
    per-axis bounds are achieved simultaneously when the boxes are concentric,
    so the bound min(w_f, w_a) * min(w_f*r_f, w_a*r_a) is tight.
    """
    if face_w <= 0 or face_ar <= 0 or anchor_w <= 0 or anchor_ar <= 0:
        raise ValueError("ideal_max_intersection requires positive dimensions and ratios")
    return min(face_w, anchor_w) * min(face_w * face_ar, anchor_w * anchor_ar)
