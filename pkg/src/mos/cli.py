"""``mos`` command line: batch evaluation and the toolkit's file-level operations.

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import hierpr, perturb
from .complexity import dataset_complexity
from .hierpr import FormatError
from .masks import (
    DegenerateMaskError,
    MaskFormatError,
    load_image,
    load_mask,
    load_scoremap,
    save_image,
    save_mask,
    save_scoremap,
)
from .metrics import MeticulosityParams, iou
from .pipeline import PipelineConfig, RefinerError, composite_green, hierpr_refiner, identity_refiner, resize_score, run_pipeline
from .report import IMAGE_SUFFIXES, PairingError, evaluate_batch, pair_dataset, write_report
from .schedule import DecoderSchedule, canonical_schedule, validate

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3

DATA_ERRORS = (
    PairingError,
    MaskFormatError,
    DegenerateMaskError,
    FormatError,
    RefinerError,
    perturb.PerturbError,
    FileNotFoundError,
    ValueError,
)

log = logging.getLogger("mos")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def cmd_eval(args) -> int:
    pairing = pair_dataset(args.pred, args.gt)
    for w in pairing.warnings:
        log.warning(w)
    report = evaluate_batch(pairing, MeticulosityParams(args.bands), workers=args.workers)
    write_report(report, args.csv, args.json)
    agg = report.aggregate
    print(f"evaluated {report.evaluated}, skipped {len(report.skipped)}, unmatched {len(pairing.warnings)}")
    if agg is not None:
        print("  ".join(f"{k}={v:.6f}" for k, v in agg.as_dict().items()))
    return EXIT_OK


def cmd_complexity(args) -> int:
    paths = sorted(p for p in Path(args.gt).iterdir() if p.suffix.lower() in IMAGE_SUFFIXES)
    if not paths:
        raise PairingError(f"no mask files in {args.gt}")
    res = dataset_complexity(paths)
    doc = {
        "mean_c_ipq": res.mean,
        "count": res.count,
        "images": {Path(k).stem: vars(v) for k, v in res.rows.items()},
        "skipped": {Path(k).stem: v for k, v in res.skipped.items()},
    }
    if args.json:
        Path(args.json).write_text(json.dumps(doc, indent=2) + "\n")
    print(f"mean C_IPQ {res.mean:.6g} over {res.count} masks ({len(res.skipped)} skipped)")
    return EXIT_OK


def cmd_perturb(args) -> int:
    gt = load_mask(args.gt)
    spec = perturb.PerturbSpec(
        kind=args.kind,
        radius=args.radius,
        chunk_diameter=args.chunk_diameter,
        count=args.count,
        iou_range=tuple(args.iou_range),
        seed=args.seed,
    )
    out = perturb.apply(gt, spec)
    save_mask(out, args.out)
    sidecar = Path(args.out).with_suffix(".json")
    doc = {
        "kind": spec.kind,
        "radius": spec.radius,
        "chunk_diameter": spec.chunk_diameter,
        "count": spec.count,
        "iou_range": list(spec.iou_range),
        "seed": spec.seed,
        "iou": iou(out, gt),
    }
    sidecar.write_text(json.dumps(doc, indent=2) + "\n")
    print(f"wrote {args.out} (IoU {doc['iou']:.6f})")
    return EXIT_OK


def cmd_hierpr_refine(args) -> int:
    coarse = load_scoremap(args.coarse)
    feats = hierpr.load_tensor(args.features)
    weights = hierpr.load_weights(args.weights)
    if feats.shape[0] != weights.channels:
        raise FormatError(f"feature tensor has {feats.shape[0]} channels, weights expect {weights.channels}")
    out = hierpr.hierpr_step(coarse, feats, weights, args.fraction, upsample=not args.same_resolution)
    save_scoremap(out, args.out)
    print(f"wrote {args.out} ({out.shape[1]}x{out.shape[0]})")
    return EXIT_OK


def cmd_schedule_validate(args) -> int:
    sched = DecoderSchedule.from_json(args.schedule) if args.schedule else canonical_schedule()
    if args.dump:
        sched.to_json(args.dump)
    problems = validate(sched)
    for p in problems:
        print(p)
    if problems:
        return EXIT_DATA
    print(f"OK: {len(sched.blocks)} blocks, no violations")
    return EXIT_OK


def cmd_pipeline_run(args) -> int:
    image = load_image(args.image)
    coarse_map = load_scoremap(args.coarse)
    cfg = PipelineConfig(args.low_res_side, args.patch_side, args.patch_stride, args.threshold)

    def coarse_source(small):
        return resize_score(coarse_map, small.shape[1], small.shape[0])

    if args.refiner == "hierpr":
        if not args.weights:
            raise UsageError("--weights is required with --refiner hierpr")
        refiner = hierpr_refiner(hierpr.load_weights(args.weights), args.fraction)
    else:
        refiner = identity_refiner
    mask = run_pipeline(image, coarse_source, refiner, cfg)
    save_mask(mask, args.out_mask)
    if args.out_composite:
        save_image(composite_green(image, mask), args.out_composite)
    print(f"wrote {args.out_mask} (foreground {np.mean(mask):.4f})")
    return EXIT_OK


def cmd_composite(args) -> int:
    save_image(composite_green(load_image(args.image), load_mask(args.mask)), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="mos", description="Meticulous segmentation evaluation toolkit.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("eval", help="score a directory of predictions against ground truths")
    p.add_argument("--pred", required=True, type=Path)
    p.add_argument("--gt", required=True, type=Path)
    p.add_argument("--csv", type=Path)
    p.add_argument("--json", type=Path)
    p.add_argument("--bands", type=int, default=5)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("complexity", help="calibrated C_IPQ for a directory of masks")
    p.add_argument("--gt", required=True, type=Path)
    p.add_argument("--json", type=Path)
    p.set_defaults(func=cmd_complexity)

    p = sub.add_parser("perturb", help="write a seeded perturbation of a mask")
    p.add_argument("--gt", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--kind", required=True, choices=perturb.PerturbSpec.KINDS)
    p.add_argument("--radius", type=int, default=0)
    p.add_argument("--chunk-diameter", type=int, default=1)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--iou-range", type=float, nargs=2, default=(0.8, 1.0), metavar=("LO", "HI"))
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_perturb)

    p = sub.add_parser("hierpr-refine", help="apply one HierPR block to a coarse score map")
    p.add_argument("--coarse", required=True, type=Path)
    p.add_argument("--features", required=True, type=Path)
    p.add_argument("--weights", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--fraction", type=float, default=0.1)
    p.add_argument("--same-resolution", action="store_true")
    p.set_defaults(func=cmd_hierpr_refine)

    p = sub.add_parser("schedule-validate", help="check a decoder schedule (default: canonical)")
    p.add_argument("--schedule", type=Path)
    p.add_argument("--dump", type=Path, help="also write the schedule as JSON")
    p.set_defaults(func=cmd_schedule_validate)

    p = sub.add_parser("pipeline-run", help="coarse-to-fine patch pipeline on one image")
    p.add_argument("--image", required=True, type=Path)
    p.add_argument("--coarse", required=True, type=Path, help="coarse score map (any size)")
    p.add_argument("--refiner", choices=("identity", "hierpr"), default="identity")
    p.add_argument("--weights", type=Path)
    p.add_argument("--fraction", type=float, default=0.1)
    p.add_argument("--out-mask", required=True, type=Path)
    p.add_argument("--out-composite", type=Path)
    p.add_argument("--low-res-side", type=int, default=336)
    p.add_argument("--patch-side", type=int, default=224)
    p.add_argument("--patch-stride", type=int, default=112)
    p.add_argument("--threshold", type=float, default=0.5)
    p.set_defaults(func=cmd_pipeline_run)

    p = sub.add_parser("composite", help="composite an image's foreground on green")
    p.add_argument("--image", required=True, type=Path)
    p.add_argument("--mask", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path)
    p.set_defaults(func=cmd_composite)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"mos: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"mos: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DATA_ERRORS as exc:
        print(f"mos: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001
        log.exception("internal error")
        print(f"mos: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
