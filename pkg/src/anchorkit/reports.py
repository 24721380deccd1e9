"""Report emission: JSON, CSV, and aligned-text renderings of analysis outputs.

CSV and table output print numeric values with six decimal places (the
precision annotation aspect ratios are quoted at); JSON carries full
precision plus a schema_version field. Field order is fixed so identical
inputs emit identical bytes.
"""

from __future__ import annotations

import json

from .ams import AmsReport, FaceMatchStat
from .cropsim import SimOutcome
from .matching import MatchResult

SCHEMA_VERSION = 1

FACE_STATS_CSV_HEADER = "image,face,ar,width,max_iou,matched"
SIM_CSV_HEADER = "image,face,crops_seen,crops_positive,best_observed_iou,best_ideal_iou"
MATCH_CSV_HEADER = "face,max_iou,positive_count,effective_tp"


def _f6(v: float | None) -> str:
    return "-" if v is None else f"{v:.6f}"


def _json(payload: dict) -> str:
    return json.dumps(payload, indent=2) + "\n"


def ams_report_dict(report: AmsReport) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "t_p": report.t_p,
        "anchor_ar": report.anchor_ar,
        "n_faces": report.n_faces,
        "n_matched": report.n_matched,
        "matched_ar_min": report.matched_ar_min,
        "matched_ar_max": report.matched_ar_max,
        "fitted_eta": report.fitted_eta,
        "analytic_eta": report.analytic_eta,
    }


def _ams_table(report: AmsReport) -> str:
    if report.n_matched > 0:
        rng = f"{report.matched_ar_min:.6f} ~ {report.matched_ar_max:.6f}"
    else:
        rng = "-"
    arsd = f"D({report.anchor_ar:.2f},{report.analytic_eta:.2f})"
    header = f"{'Tp':<6}{'Ra':<6}{'Range':<23}{'ARSD':<14}{'matched':>9}"
    row = (
        f"{report.t_p:<6.2f}{report.anchor_ar:<6.2f}{rng:<23}{arsd:<14}"
        f"{report.n_matched:>4}/{report.n_faces}"
    )
    return header + "\n" + row + "\n"


def _ams_csv(report: AmsReport) -> str:
    header = "t_p,anchor_ar,n_faces,n_matched,matched_ar_min,matched_ar_max,fitted_eta,analytic_eta"
    row = ",".join(
        [
            _f6(report.t_p),
            _f6(report.anchor_ar),
            str(report.n_faces),
            str(report.n_matched),
            _f6(report.matched_ar_min),
            _f6(report.matched_ar_max),
            _f6(report.fitted_eta),
            _f6(report.analytic_eta),
        ]
    )
    return header + "\n" + row + "\n"


def _face_stats_csv(stats: list[FaceMatchStat]) -> str:
    lines = [FACE_STATS_CSV_HEADER]
    for s in stats:
        lines.append(
            f"{s.image},{s.face},{_f6(s.ar)},{_f6(s.width)},{_f6(s.max_iou)},"
            f"{1 if s.matched else 0}"
        )
    return "\n".join(lines) + "\n"


def _face_stats_table(stats: list[FaceMatchStat]) -> str:
    lines = [f"{'image':<32}{'face':>5} {'ar':>10} {'width':>12} {'max_iou':>10} {'matched':>8}"]
    for s in stats:
        lines.append(
            f"{s.image:<32}{s.face:>5} {s.ar:>10.6f} {s.width:>12.6f} "
            f"{s.max_iou:>10.6f} {1 if s.matched else 0:>8}"
        )
    return "\n".join(lines) + "\n"


def _face_stats_json(stats: list[FaceMatchStat]) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "per_face": [
            {
                "image": s.image,
                "face": s.face,
                "ar": s.ar,
                "width": s.width,
                "max_iou": s.max_iou,
                "matched": s.matched,
            }
            for s in stats
        ],
    }


def _sim_csv(outcome: SimOutcome) -> str:
    lines = [SIM_CSV_HEADER]
    for s in outcome.per_face:
        lines.append(
            f"{s.image},{s.face},{s.crops_seen},{s.crops_positive},"
            f"{_f6(s.best_observed_iou)},{_f6(s.best_ideal_iou)}"
        )
    return "\n".join(lines) + "\n"


def _match_result_dict(result: MatchResult) -> dict:
    counts = result.label_counts()
    return {
        "schema_version": SCHEMA_VERSION,
        "n_anchors": result.n_anchors,
        "n_positive": counts["positive"],
        "n_negative": counts["negative"],
        "n_ignore": counts["ignore"],
        "n_compensated": counts["compensated"],
        "per_face": [
            {
                "face": fm.face_index,
                "max_iou": fm.max_iou,
                "positive_count": fm.positive_count,
                "effective_tp": fm.effective_tp,
            }
            for fm in result.per_face
        ],
    }


def _match_result_csv(result: MatchResult) -> str:
    lines = [MATCH_CSV_HEADER]
    for fm in result.per_face:
        lines.append(
            f"{fm.face_index},{_f6(fm.max_iou)},{fm.positive_count},{_f6(fm.effective_tp)}"
        )
    return "\n".join(lines) + "\n"


def _match_result_table(result: MatchResult) -> str:
    counts = result.label_counts()
    lines = [
        f"anchors   {result.n_anchors}",
        f"positive  {counts['positive']} (compensated {counts['compensated']})",
        f"negative  {counts['negative']}",
        f"ignore    {counts['ignore']}",
        f"{'face':>5} {'max_iou':>10} {'positives':>10} {'tp':>9}",
    ]
    for fm in result.per_face:
        lines.append(
            f"{fm.face_index:>5} {fm.max_iou:>10.6f} {fm.positive_count:>10} "
            f"{fm.effective_tp:>9.6f}"
        )
    return "\n".join(lines) + "\n"


def emit_reports(stats, fmt: str) -> str:
    """Render an analysis output in the requested format.

    Accepts an AmsReport, a list of FaceMatchStat (possibly empty), a
    MatchResult, or a SimOutcome; formats are "json", "csv", and "table".
    """
    if fmt not in ("json", "csv", "table"):
        raise ValueError(f"unknown report format {fmt!r}")

    if isinstance(stats, AmsReport):
        if fmt == "json":
            return _json(ams_report_dict(stats))
        if fmt == "csv":
            return _ams_csv(stats)
        return _ams_table(stats)

    if isinstance(stats, MatchResult):
        if fmt == "json":
            return _json(_match_result_dict(stats))
        if fmt == "csv":
            return _match_result_csv(stats)
        return _match_result_table(stats)

    if isinstance(stats, SimOutcome):
        payload = {"schema_version": SCHEMA_VERSION, **stats.to_json_dict()}
        if fmt == "json":
            return _json(payload)
        if fmt == "csv":
            return _sim_csv(stats)
        raise ValueError("simulation outcomes render as json or csv")

    if isinstance(stats, (list, tuple)):
        items = list(stats)
        if any(not isinstance(s, FaceMatchStat) for s in items):
            raise TypeError("list reports must contain FaceMatchStat entries")
        if fmt == "json":
            return _json(_face_stats_json(items))
        if fmt == "csv":
            return _face_stats_csv(items)
        return _face_stats_table(items)

    raise TypeError(f"no report emitter for {type(stats).__name__}")
