"""Command-line interface.

Subcommands: ams (ideal-placement matching simulation), match (label
assignment audit), simulate (seeded random-crop simulation), rfd (block
inspection), parse (annotation validation), coverage (aspect-ratio domain
coverage). Exit codes: 0 success, 1 validation or parse error, 2 I/O error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from typing import Sequence

from .ams import run_ams
from .anchors import AnchorDesign, ams_design, detector_design, generate_anchor_boxes, ladder_design
from .corpus import (
    FixedListAR,
    LogUniformAR,
    WiderParseError,
    ar_coverage,
    attach_dims,
    corpus_counts,
    generate_synthetic,
    iter_faces,
    parse_wider,
    read_dims_csv,
    serialize_wider,
)
from .cropsim import CropParams, simulate
from .matching import MatchConfig, Strategy, assign_labels_xywh
from .reports import SCHEMA_VERSION, emit_reports
from .rfd import rfd_param_count, rfd_receptive_fields, rfd_spec

_SQRT2_TEXT = "1.4142135624"


def _add_match_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--strategy", choices=["sam", "sam_compensate", "warm"],
                   default="warm", help="matching strategy (default: warm)")
    p.add_argument("--tp", type=float, default=0.5,
                   help="base positive IoU threshold T0 (default: 0.5)")
    p.add_argument("--tn", type=float, default=0.35,
                   help="negative IoU threshold (default: 0.35)")
    p.add_argument("--delta", type=float, default=0.1,
                   help="WARM threshold amplitude (default: 0.1)")
    p.add_argument("--eta0", type=float, default=2.0,
                   help="inner extreme-AR domain radius (default: 2.0)")
    p.add_argument("--eta1", type=float, default=3.0,
                   help="outer extreme-AR domain radius (default: 3.0)")
    p.add_argument("--anchor-ar", type=float, default=1.0,
                   help="anchor aspect ratio, height/width (default: 1.0)")


def _add_synthetic_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--synthetic", type=int, metavar="N",
                   help="generate N synthetic faces instead of reading annotations")
    p.add_argument("--seed", type=int, default=0, help="PRNG seed (default: 0)")
    p.add_argument("--ar-lo", type=float, default=0.2,
                   help="synthetic AR law lower bound (default: 0.2)")
    p.add_argument("--ar-hi", type=float, default=5.0,
                   help="synthetic AR law upper bound (default: 5.0)")
    p.add_argument("--ar-list", type=str, default=None,
                   help="comma-separated fixed AR list for the synthetic corpus")


def _match_config(args: argparse.Namespace) -> MatchConfig:
    return MatchConfig(
        strategy=Strategy(args.strategy),
        t0=args.tp,
        tn=args.tn,
        delta=args.delta,
        eta0=args.eta0,
        eta1=args.eta1,
        anchor_ar=args.anchor_ar,
    )


def _load_records(args: argparse.Namespace):
    if getattr(args, "synthetic", None):
        if args.ar_list:
            law = FixedListAR(tuple(float(v) for v in args.ar_list.split(",")))
        else:
            law = LogUniformAR(args.ar_lo, args.ar_hi)
        return generate_synthetic(args.seed, args.synthetic, law)
    if not args.annotations:
        raise ValueError("either --annotations or --synthetic is required")
    with open(args.annotations, "r", encoding="utf-8") as fh:
        records = parse_wider(fh)
    if getattr(args, "dims", None):
        records = attach_dims(records, read_dims_csv(args.dims))
    return records


def _design_for(args: argparse.Namespace) -> AnchorDesign:
    name = getattr(args, "design", "detector")
    if name == "detector":
        return detector_design()
    if name == "ams":
        step = getattr(args, "scale_step", None)
        if step is not None and abs(step - math.sqrt(2.0)) > 1e-12:
            return ladder_design(args.anchor_ar, scale_step=step)
        return ams_design(args.anchor_ar)
    return _load_design_file(name)


def _load_design_file(path: str) -> AnchorDesign:
    with open(path, "r", encoding="utf-8") as fh:
        return AnchorDesign.from_json(fh.read())


def _write_out(text: str, out: str | None) -> None:
    if out and out != "-":
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_ams(args: argparse.Namespace) -> int:
    records = _load_records(args)
    if abs(args.scale_step - math.sqrt(2.0)) > 1e-12:
        design = ladder_design(args.anchor_ar, scale_step=args.scale_step)
    else:
        design = ams_design(args.anchor_ar)
    report, stats = run_ams(records, design, args.tp)
    if args.format == "csv":
        # CSV is the per-face schema; the summary lives in table/json output.
        text = emit_reports(stats, "csv")
    elif args.format == "json":
        payload = json.loads(emit_reports(report, "json"))
        if args.per_face:
            payload["per_face"] = json.loads(emit_reports(stats, "json"))["per_face"]
        text = json.dumps(payload, indent=2) + "\n"
    else:
        text = emit_reports(report, "table")
        if args.per_face:
            text += emit_reports(stats, "csv")
    _write_out(text, args.out)
    return 0


def _canvas_for(rec, faces, max_stride: float) -> tuple[float, float]:
    if rec.width is not None and rec.height is not None:
        return rec.width, rec.height
    # Fall back to the smallest stride-aligned canvas covering the faces.
    max_x = max(f.box.x2 for f in faces)
    max_y = max(f.box.y2 for f in faces)
    w = max(max_stride, math.ceil(max_x / max_stride) * max_stride)
    h = max(max_stride, math.ceil(max_y / max_stride) * max_stride)
    return float(w), float(h)


def _cmd_match(args: argparse.Namespace) -> int:
    records = _load_records(args)
    cfg = _match_config(args)
    design = _design_for(args)
    max_stride = max(lv.stride for lv in design.levels)

    rows = []
    totals = {"positive": 0, "negative": 0, "ignore": 0, "compensated": 0}
    n_faces = 0
    n_matched = 0
    n_anchors = 0
    n_images = 0
    for rec in records:
        faces = [(idx, face) for _, idx, face in iter_faces([rec])]
        if not faces:
            continue
        n_images += 1
        canvas_w, canvas_h = _canvas_for(rec, [f for _, f in faces], max_stride)
        anchor_arr = generate_anchor_boxes(design, canvas_w, canvas_h)
        n_anchors += anchor_arr.shape[0]
        face_arr = [[f.box.x, f.box.y, f.box.w, f.box.h] for _, f in faces]
        result = assign_labels_xywh(anchor_arr, face_arr, cfg)
        counts = result.label_counts()
        for key in totals:
            totals[key] += counts[key]
        for (idx, face), fm in zip(faces, result.per_face):
            n_faces += 1
            if fm.positive_count > 0:
                n_matched += 1
            rows.append(
                {
                    "image": rec.path,
                    "face": idx,
                    "ar": face.box.h / face.box.w,
                    "max_iou": fm.max_iou,
                    "positive_count": fm.positive_count,
                    "effective_tp": fm.effective_tp,
                }
            )

    if args.format == "csv":
        lines = ["image,face,ar,max_iou,positive_count,effective_tp"]
        for r in rows:
            lines.append(
                f"{r['image']},{r['face']},{r['ar']:.6f},{r['max_iou']:.6f},"
                f"{r['positive_count']},{r['effective_tp']:.6f}"
            )
        text = "\n".join(lines) + "\n"
    elif args.format == "table":
        lines = [
            f"images    {n_images}",
            f"anchors   {n_anchors}",
            f"faces     {n_faces} (matched {n_matched})",
            f"positive  {totals['positive']} (compensated {totals['compensated']})",
            f"negative  {totals['negative']}",
            f"ignore    {totals['ignore']}",
        ]
        text = "\n".join(lines) + "\n"
    else:
        payload = {
            "schema_version": SCHEMA_VERSION,
            "config": cfg.to_json_dict(),
            "n_images": n_images,
            "n_anchors": n_anchors,
            "n_faces": n_faces,
            "n_faces_matched": n_matched,
            "labels": totals,
            "per_face": rows,
        }
        text = json.dumps(payload, indent=2) + "\n"
    _write_out(text, args.out)
    return 0


def _cmd_simulate(args: argparse.Namespace) -> int:
    records = _load_records(args)
    cfg = _match_config(args)
    design = _design_for(args)
    scales = tuple(float(s) for s in args.scales.split(","))
    params = CropParams(scale_options=scales, output_side=args.output_side)
    outcome = simulate(records, design, cfg, args.crops, args.seed, params)
    _write_out(emit_reports(outcome, args.format), args.out)
    return 0


def _cmd_rfd(args: argparse.Namespace) -> int:
    spec = rfd_spec(args.channels)
    params = rfd_param_count(args.channels, include_bias=args.bias)
    fields = rfd_receptive_fields(spec)
    if args.format == "json":
        payload = {
            "schema_version": SCHEMA_VERSION,
            "channels": args.channels,
            "include_bias": args.bias,
            "param_count": params,
            "receptive_fields": [list(rf) for rf in fields],
            "paths": [
                {
                    "reduce": [p.reduce.kh, p.reduce.kw, p.reduce.c_in, p.reduce.c_out],
                    "body": [p.body.kh, p.body.kw, p.body.c_in, p.body.c_out],
                }
                for p in spec.paths
            ],
        }
        text = json.dumps(payload, indent=2) + "\n"
    else:
        lines = [
            f"channels        {args.channels}",
            f"param_count     {params}" + ("  (with bias)" if args.bias else ""),
            "path  reduce      body        receptive_field",
        ]
        for i, (p, rf) in enumerate(zip(spec.paths, fields)):
            lines.append(
                f"{i:<6}1x1 {p.reduce.c_in}->{p.reduce.c_out:<6}"
                f"{p.body.kh}x{p.body.kw} {p.body.c_in}->{p.body.c_out:<6}"
                f"{rf[0]}x{rf[1]}"
            )
        lines.append(f"short identity                {fields[-1][0]}x{fields[-1][1]}")
        text = "\n".join(lines) + "\n"
    _write_out(text, args.out)
    return 0


def _cmd_parse(args: argparse.Namespace) -> int:
    with open(args.annotations, "r", encoding="utf-8") as fh:
        records = parse_wider(fh)
    if args.emit:
        _write_out(serialize_wider(records), args.out)
        return 0
    payload = {"schema_version": SCHEMA_VERSION, **corpus_counts(records)}
    _write_out(json.dumps(payload, indent=2) + "\n", args.out)
    return 0


def _cmd_coverage(args: argparse.Namespace) -> int:
    records = _load_records(args)
    frac = ar_coverage(records, args.anchor_ar, args.eta)
    if args.format == "json":
        payload = {
            "schema_version": SCHEMA_VERSION,
            "anchor_ar": args.anchor_ar,
            "eta": args.eta,
            "coverage": frac,
        }
        text = json.dumps(payload, indent=2) + "\n"
    else:
        text = f"{frac:.6f}\n"
    _write_out(text, args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="anchorkit",
        description="Anchor-matching analytics for face detection.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_ams = sub.add_parser("ams", help="ideal-placement anchor matching simulation")
    p_ams.add_argument("--annotations", help="WIDER-format annotation file")
    _add_synthetic_flags(p_ams)
    p_ams.add_argument("--tp", type=float, default=0.5,
                       help="positive IoU threshold (default: 0.5)")
    p_ams.add_argument("--anchor-ar", type=float, default=1.0,
                       help="anchor aspect ratio (default: 1.0)")
    p_ams.add_argument("--scale-step", type=float, default=math.sqrt(2.0),
                       help=f"size ladder step (default: {_SQRT2_TEXT})")
    p_ams.add_argument("--format", choices=["table", "json", "csv"], default="table",
                       help="report format (default: table)")
    p_ams.add_argument("--per-face", action=argparse.BooleanOptionalAction, default=True,
                       help="append per-face stats (default: enabled)")
    p_ams.add_argument("--out", help="write output to this path instead of stdout")
    p_ams.set_defaults(func=_cmd_ams)

    p_match = sub.add_parser("match", help="audit label assignment over a corpus")
    p_match.add_argument("--annotations", help="WIDER-format annotation file")
    p_match.add_argument("--dims", help="sidecar CSV path,width,height with image dims")
    _add_synthetic_flags(p_match)
    _add_match_flags(p_match)
    p_match.add_argument("--design", default="detector",
                         help="anchor design: detector, ams, or a JSON file (default: detector)")
    p_match.add_argument("--scale-step", type=float, default=math.sqrt(2.0),
                         help=f"size ladder step for --design ams (default: {_SQRT2_TEXT})")
    p_match.add_argument("--threads", type=int, default=1,
                         help="worker cap; results are identical at any value (default: 1)")
    p_match.add_argument("--format", choices=["json", "table", "csv"], default="json",
                         help="report format (default: json)")
    p_match.add_argument("--out", help="write output to this path instead of stdout")
    p_match.set_defaults(func=_cmd_match)

    p_sim = sub.add_parser("simulate", help="seeded random-crop matching simulation")
    p_sim.add_argument("--annotations", help="WIDER-format annotation file")
    p_sim.add_argument("--dims", help="sidecar CSV path,width,height with image dims")
    _add_synthetic_flags(p_sim)
    _add_match_flags(p_sim)
    p_sim.add_argument("--design", default="detector",
                       help="anchor design: detector, ams, or a JSON file (default: detector)")
    p_sim.add_argument("--crops", type=int, default=200,
                       help="number of crops per image (default: 200)")
    p_sim.add_argument("--scales", default="0.3,0.45,0.6,0.8,1.0",
                       help="comma-separated crop scales (default: 0.3,0.45,0.6,0.8,1.0)")
    p_sim.add_argument("--output-side", type=float, default=640.0,
                       help="output canvas side in px (default: 640)")
    p_sim.add_argument("--threads", type=int, default=1,
                       help="worker cap; results are identical at any value (default: 1)")
    p_sim.add_argument("--format", choices=["json", "csv"], default="json",
                       help="report format (default: json)")
    p_sim.add_argument("--out", help="write output to this path instead of stdout")
    p_sim.set_defaults(func=_cmd_simulate)

    p_rfd = sub.add_parser("rfd", help="inspect the RFD block structure")
    p_rfd.add_argument("--channels", type=int, required=True,
                       help="input channel count (must be a multiple of 4)")
    p_rfd.add_argument("--bias", action="store_true",
                       help="include bias terms in the parameter count (default: off)")
    p_rfd.add_argument("--format", choices=["json", "table"], default="table",
                       help="report format (default: table)")
    p_rfd.add_argument("--out", help="write output to this path instead of stdout")
    p_rfd.set_defaults(func=_cmd_rfd)

    p_parse = sub.add_parser("parse", help="validate a WIDER-format annotation file")
    p_parse.add_argument("--annotations", required=True, help="annotation file to validate")
    p_parse.add_argument("--emit", action="store_true",
                         help="emit the canonical serialization instead of a "
                              "summary (default: off)")
    p_parse.add_argument("--out", help="write output to this path instead of stdout")
    p_parse.set_defaults(func=_cmd_parse)

    p_cov = sub.add_parser("coverage", help="aspect-ratio sampling-domain coverage")
    p_cov.add_argument("--annotations", help="WIDER-format annotation file")
    _add_synthetic_flags(p_cov)
    p_cov.add_argument("--anchor-ar", type=float, default=1.0,
                       help="anchor aspect ratio (default: 1.0)")
    p_cov.add_argument("--eta", type=float, default=5.0,
                       help="sampling-domain radius (default: 5.0)")
    p_cov.add_argument("--format", choices=["text", "json"], default="text",
                       help="report format (default: text)")
    p_cov.add_argument("--out", help="write output to this path instead of stdout")
    p_cov.set_defaults(func=_cmd_coverage)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "threads", 1) is not None and getattr(args, "threads", 1) < 1:
        print("error: --threads must be at least 1", file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except WiderParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
