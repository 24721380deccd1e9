"""Per-face best-achievable IoU and the anchor matching simulation.

The central quantity is the IoU a face could reach against a design if an
anchor were placed perfectly on it (the "enough random crops" limit). On a
discrete size ladder this is an enumeration over sizes; in the limit of a
dense ladder it has a closed form depending only on the aspect-ratio mismatch
rho = max(r_face/r_anchor, r_anchor/r_face):

    max IoU = 1 / (2*sqrt(rho) - 1)

obtained by optimizing the anchor scale: the best scale is the geometric mean
of the face's width and height (normalized by the anchor shape), where the
anchor matches the face's width on one axis and undershoots by sqrt(rho) on
the other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

from .anchors import AnchorDesign
from .corpus import ImageRecord, iter_faces


@dataclass(frozen=True)
class FaceMatchStat:
    """One face's matching outcome under ideal placement."""

    image: str
    face: int
    ar: float
    width: float
    max_iou: float
    matched: bool


@dataclass(frozen=True)
class AmsReport:
    """Matched aspect-ratio range for one (threshold, anchor AR) configuration.

    fitted_eta is the empirical sampling-domain radius (from the wider of the
    two matched-AR tails); analytic_eta is the radius where the closed-form
    max IoU equals the threshold. Range fields are None when nothing matched.
    """

    t_p: float
    anchor_ar: float
    matched_ar_min: float | None
    matched_ar_max: float | None
    fitted_eta: float | None
    n_faces: int
    n_matched: int

    @property
    def analytic_eta(self) -> float:
        # A zero threshold matches every aspect ratio.
        if self.t_p == 0.0:
            return math.inf
        return boundary_ar(self.t_p, 1.0)


def ideal_max_iou(face_w: float, face_ar: float, design: AnchorDesign) -> float:
    """Best IoU the face can reach against the design under ideal placement.

    Maximizes over the design's size ladder; the per-size bound is the
    concentric-placement intersection min(w_f, s) * min(w_f*r_f, s*r_a).
    """
    if face_w <= 0 or face_ar <= 0:
        raise ValueError("face width and aspect ratio must be positive")
    ra = design.aspect_ratio
    face_area = face_w * face_w * face_ar
    face_h = face_w * face_ar
    best = 0.0
    for s in design.sizes:
        inter = min(face_w, s) * min(face_h, s * ra)
        val = inter / (face_area + s * s * ra - inter)
        if val > best:
            best = val
    return best


def analytic_max_iou(face_ar: float, anchor_ar: float) -> float:
    """Closed-form ideal max IoU for a continuous scale ladder (see module docstring)."""
    if face_ar <= 0 or anchor_ar <= 0:
        raise ValueError("aspect ratios must be positive")
    rho = max(face_ar / anchor_ar, anchor_ar / face_ar)
    return 1.0 / (2.0 * math.sqrt(rho) - 1.0)


def boundary_ar(t_p: float, anchor_ar: float) -> float:
    """Right aspect-ratio boundary where the closed-form max IoU equals t_p.

    Inverse of analytic_max_iou in the AR direction: anchor_ar*((1/t + 1)/2)^2.
    The left boundary is anchor_ar**2 / boundary_ar(t_p, anchor_ar) by symmetry.
    """
    if not 0.0 < t_p <= 1.0:
        raise ValueError("t_p must be in (0, 1]")
    if anchor_ar <= 0:
        raise ValueError("anchor_ar must be positive")
    half = (1.0 / t_p + 1.0) / 2.0
    return anchor_ar * half * half


def run_ams(
    records: Iterable[ImageRecord],
    design: AnchorDesign,
    t_p: float,
    include_invalid: bool = False,
) -> tuple[AmsReport, list[FaceMatchStat]]:
    """Simulate matching over a corpus: compute each face's ideal max IoU,
    mark it matched when strictly above t_p, and report the matched-AR range.

    Faces flagged invalid are skipped unless include_invalid is set;
    degenerate boxes are always skipped (they have no aspect ratio).
    """
    if not 0.0 <= t_p <= 1.0:
        raise ValueError("t_p must be in [0, 1]")
    stats: list[FaceMatchStat] = []
    for rec, idx, face in iter_faces(records, include_invalid=include_invalid):
        w = face.box.w
        ar = face.box.h / face.box.w
        mi = ideal_max_iou(w, ar, design)
        stats.append(FaceMatchStat(rec.path, idx, ar, w, mi, mi > t_p))

    matched_ars = [s.ar for s in stats if s.matched]
    if matched_ars:
        ar_min = min(matched_ars)
        ar_max = max(matched_ars)
        ra = design.aspect_ratio
        fitted = max(ar_max / ra, ra / ar_min)
    else:
        ar_min = ar_max = fitted = None

    report = AmsReport(
        t_p=t_p,
        anchor_ar=design.aspect_ratio,
        matched_ar_min=ar_min,
        matched_ar_max=ar_max,
        fitted_eta=fitted,
        n_faces=len(stats),
        n_matched=len(matched_ars),
    )
    return report, stats
