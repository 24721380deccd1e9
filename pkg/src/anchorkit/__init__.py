"""anchorkit: anchor-matching analytics for face detection.

Computes each face's best-achievable anchor IoU, simulates anchor matching
over annotation corpora, assigns positive/negative/ignore labels under SAM
and WARM strategies, audits aspect-ratio sampling coverage, and models the
RFD feature-enhancement block's shapes, receptive fields, and parameters.
"""

from .ams import (
    AmsReport,
    FaceMatchStat,
    analytic_max_iou,
    boundary_ar,
    ideal_max_iou,
    run_ams,
)
from .anchors import (
    Anchor,
    AnchorDesign,
    PyramidLevel,
    ams_design,
    detector_design,
    generate_anchor_boxes,
    generate_anchors,
    ladder_design,
)
from .corpus import (
    FaceAnnotation,
    FixedListAR,
    ImageRecord,
    LogUniformAR,
    WiderParseError,
    ar_coverage,
    generate_synthetic,
    parse_wider,
    serialize_wider,
)
from .cropsim import CropParams, CropResult, FaceSimStat, SimOutcome, random_crop, simulate
from .geometry import Box, aspect_ratio, ideal_max_intersection, intersection_area, iou
from .matching import (
    IGNORE,
    NEGATIVE,
    DomainSide,
    FaceMatch,
    MatchConfig,
    MatchResult,
    Strategy,
    arsd_contains,
    arsd_contains_left,
    arsd_contains_right,
    assign_labels,
    assign_labels_xywh,
    extreme_domain_contains,
    iou_matrix,
    theta,
    warm_threshold,
)
from .reports import emit_reports
from .rfd import (
    ConvSpec,
    RfdSpec,
    RfdWeights,
    rfd_forward_naive,
    rfd_output_shape,
    rfd_param_count,
    rfd_receptive_fields,
    rfd_spec,
    zero_weights,
)

__version__ = "0.1.0"

__all__ = [
    "AmsReport",
    "Anchor",
    "AnchorDesign",
    "Box",
    "ConvSpec",
    "CropParams",
    "CropResult",
    "DomainSide",
    "FaceAnnotation",
    "FaceMatch",
    "FaceMatchStat",
    "FaceSimStat",
    "FixedListAR",
    "IGNORE",
    "ImageRecord",
    "LogUniformAR",
    "MatchConfig",
    "MatchResult",
    "NEGATIVE",
    "PyramidLevel",
    "RfdSpec",
    "RfdWeights",
    "SimOutcome",
    "Strategy",
    "WiderParseError",
    "ams_design",
    "analytic_max_iou",
    "ar_coverage",
    "arsd_contains",
    "arsd_contains_left",
    "arsd_contains_right",
    "aspect_ratio",
    "assign_labels",
    "assign_labels_xywh",
    "boundary_ar",
    "detector_design",
    "emit_reports",
    "extreme_domain_contains",
    "generate_anchor_boxes",
    "generate_anchors",
    "generate_synthetic",
    "ideal_max_intersection",
    "ideal_max_iou",
    "iou",
    "intersection_area",
    "iou_matrix",
    "ladder_design",
    "parse_wider",
    "random_crop",
    "rfd_forward_naive",
    "rfd_output_shape",
    "rfd_param_count",
    "rfd_receptive_fields",
    "rfd_spec",
    "run_ams",
    "serialize_wider",
    "simulate",
    "theta",
    "warm_threshold",
    "zero_weights",
]
