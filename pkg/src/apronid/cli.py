"""Command-line interface.

Exit codes: 0 success, 2 usage error, 3 data error, 4 internal error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from apronid import __version__
from apronid.errors import DataError, UsageError
from apronid.photogrammetry import CameraModel, GroundSampleDistance, compute_gsd

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_INTERNAL = 4

CAMERA_FLAGS = ("sensor_width_mm", "altitude_m", "focal_length_mm", "image_width_px")


def _emit_json(obj) -> None:
    sys.stdout.write(json.dumps({"version": __version__, **obj}, indent=2, sort_keys=True) + "\n")


def _add_camera_flags(p, required=False):
    p.add_argument("--sensor-width-mm", type=float, required=required)
    p.add_argument("--altitude-m", type=float, required=required)
    p.add_argument("--focal-length-mm", type=float, required=required)
    p.add_argument("--image-width-px", type=int, required=required)


def _add_format(p):
    p.add_argument("--format", choices=("text", "json"), default="text")


def _camera_from_args(args) -> CameraModel:
    return CameraModel(*(getattr(args, name) for name in CAMERA_FLAGS))


def _resolve_gsd(args, required=True) -> GroundSampleDistance | None:
    # a direct --gsd wins over camera flags
    if getattr(args, "gsd", None) is not None:
        if not args.gsd > 0:
            raise UsageError(f"--gsd must be positive, got {args.gsd}")
        return GroundSampleDistance(args.gsd)
    given = [getattr(args, n) is not None for n in CAMERA_FLAGS]
    if all(given):
        return compute_gsd(_camera_from_args(args))
    if any(given):
        missing = [f"--{n.replace('_', '-')}" for n, g in zip(CAMERA_FLAGS, given) if not g]
        raise UsageError(f"incomplete camera flags, missing {' '.join(missing)}")
    if required:
        raise UsageError("give --gsd or all four camera flags")
    return None


def _load_types(args):
    from apronid.identification import load_type_db

    source = args.types or os.environ.get("APRONID_TYPES") or None
    return load_type_db(source)


def _load_nonempty_mask(path):
    from apronid.dataio import load_mask
    from apronid.errors import EmptyMask

    mask = load_mask(path)
    if mask.pixel_count == 0:
        raise EmptyMask(f"{path}: mask has no foreground pixels")
    return mask


def cmd_gsd(args) -> int:
    gsd = compute_gsd(_camera_from_args(args))
    if args.format == "json":
        _emit_json({"gsd_cm_per_px": gsd.cm_per_px})
    else:
        print(f"{gsd.cm_per_px:.2f} cm/px")
    return EXIT_OK


def cmd_identify(args) -> int:
    from apronid.geometry import mask_diameter_px
    from apronid.identification import classify_by_length
    from apronid.photogrammetry import length_m, surface_area_m2

    gsd = _resolve_gsd(args)
    db = _load_types(args)
    mask = _load_nonempty_mask(args.mask)
    diameter = mask_diameter_px(mask)
    length = length_m(diameter, gsd)
    area = surface_area_m2(mask.pixel_count, gsd)
    code = classify_by_length(length, db)
    if args.format == "json":
        _emit_json({
            "mask": str(args.mask),
            "gsd_cm_per_px": gsd.cm_per_px,
            "pixel_count": mask.pixel_count,
            "diameter_px": diameter,
            "length_m": length,
            "area_m2": area,
            "type_code": code,
        })
    else:
        print(f"length_m  {length:.2f}")
        print(f"area_m2   {area:.2f}")
        print(f"type_code {code}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    from apronid.dataio import dumps_json, load_manifest
    from apronid.evaluation import evaluate_dataset

    db = _load_types(args)
    manifest = load_manifest(args.manifest)
    report = evaluate_dataset(manifest, db, iou_threshold=args.iou_threshold)
    doc = report.to_dict()
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(dumps_json(doc), encoding="utf-8")
        (out / "confusion.csv").write_text(report.confusion.to_csv(), encoding="utf-8")
    if args.format == "json":
        sys.stdout.write(dumps_json(doc))
    else:
        print(report.summary())
    return EXIT_OK


def cmd_synth(args) -> int:
    from apronid.synthkit import synth_dataset

    if args.per_type < 0:
        raise UsageError("--per-type must be >= 0")
    if not 0 <= args.noise < 0.5:
        raise UsageError("--noise must be in [0, 0.5)")
    gsd = _resolve_gsd(args, required=False) or GroundSampleDistance(3.13)
    db = _load_types(args)
    path = synth_dataset(db, args.per_type, args.noise, args.seed, args.out, gsd=gsd,
                         mask_format=args.mask_format)
    print(path)
    return EXIT_OK


def cmd_hull(args) -> int:
    from apronid.geometry import hull_diameter_sq, mask_hull

    mask = _load_nonempty_mask(args.mask)
    hull = mask_hull(mask)
    d2 = hull_diameter_sq(hull)
    diameter = d2 ** 0.5
    if args.format == "json":
        _emit_json({
            "vertices": [[v.x, v.y] for v in hull.vertices],
            "diameter_px": diameter,
            "diameter_sq_px": d2,
        })
    else:
        for v in hull.vertices:
            print(f"{v.x} {v.y}")
        print(f"diameter_px {diameter:.5f}")
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="apronid", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gsd", help="ground sample distance from camera parameters")
    _add_camera_flags(p, required=True)
    _add_format(p)
    p.set_defaults(func=cmd_gsd)

    p = sub.add_parser("identify", help="measure one mask and assign an aircraft type")
    p.add_argument("--mask", required=True)
    p.add_argument("--gsd", type=float, help="cm/px; overrides camera flags")
    _add_camera_flags(p)
    p.add_argument("--types", help="type CSV (default: $APRONID_TYPES or built-in table)")
    _add_format(p)
    p.set_defaults(func=cmd_identify)

    p = sub.add_parser("evaluate", help="evaluate a dataset manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--types")
    p.add_argument("--out", help="directory for report.json and confusion.csv")
    p.add_argument("--iou-threshold", type=float, default=0.5)
    _add_format(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("synth", help="write a synthetic dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--per-type", type=int, required=True)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--gsd", type=float, help="cm/px (default 3.13)")
    _add_camera_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--types")
    p.add_argument("--mask-format", choices=("png", "rle"), default="png")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("hull", help="print the convex hull and diameter of a mask")
    p.add_argument("--mask", required=True)
    _add_format(p)
    p.set_defaults(func=cmd_hull)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command == "evaluate" and not 0 < args.iou_threshold <= 1:
        print("apronid: error: --iou-threshold must be in (0, 1]", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"apronid: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, OSError) as exc:
        print(f"apronid: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001
        print(f"apronid: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
