"""Command-line interface.

Subcommands:

    gen            write a seeded synthetic dataset
    score          derive per-sample error maps from stored softmax passes
    eval-pixel     pooled pixel-wise metrics (optionally mask-filtered)
    eval-instance  aggregation + matching + instance-wise metrics
    overlay        render one sample's score overlay as PPM

Exit codes: 0 success, 1 I/O or validation failure, 2 when any reported
metric is not computable (reports are still written, with null / "*"
markers).
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import dataset as ds
from .errors import DegeneratePopulationError, InstanomalyError
from .evaluate import (RunConfig, eval_instance_dataset, eval_pixel_dataset,
                       overlay_sample, score_map_for_sample)
from .reports import (csv_text, histogram_text, json_text, not_computable,
                      report_to_dict, round12)
from .synth import NoiseSpec, SceneSpec
from .tensor_store import write_ppm, write_tensor


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; this tool reserves 2 for
    not-computable results, so usage errors exit 1 instead."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _fmt(x) -> str:
    return "*" if x is None else f"{round12(x):.12g}"


def _parse_ints(text: str):
    return tuple(int(p) for p in text.split(",") if p != "")


def cmd_gen(args) -> int:
    spec = SceneSpec(
        height=args.height, width=args.width, n_objects=args.objects,
        ood_fraction=args.ood_fraction, n_classes=args.classes,
        n_ood_classes=args.ood_classes, min_size=args.min_size,
        max_size=args.max_size, shapes=tuple(args.shapes.split(",")),
        connectivity=args.connectivity, seed=0,
    )
    noise = NoiseSpec(
        background_noise=args.background_noise,
        boundary_noise=args.boundary_noise, ood_signal=args.ood_signal,
        in_dist_signal=args.in_dist_signal, signal_sigma=args.signal_sigma,
        mask_erosion=args.erosion, mask_dilation=args.dilation,
        drop_probability=args.drop,
    )
    ds.generate_dataset(args.out, args.n, args.seed, spec, noise,
                        softmax_passes=args.softmax_passes)
    print(f"wrote {args.n} samples")
    return 0


def _write(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def cmd_score(args) -> int:
    """Recompute each sample's error map from its stored softmax passes.

    Lets a dataset carrying only softmax dumps be evaluated later with
    ``--method obsnet-file``, or an existing error map be replaced by a
    softmax-derived baseline.
    """
    manifest = ds.load_manifest(args.dataset)
    passes = int(manifest.get("softmax_passes", 0))
    n = int(manifest["n_samples"])
    for i in range(n):
        u = score_map_for_sample(args.dataset, i, args.method, passes)
        out = os.path.join(ds.sample_dir(args.dataset, i), args.out_name)
        write_tensor(np.asarray(u, dtype=np.float32), out)
    print(f"scored {n} samples via {args.method}")
    return 0


def cmd_eval_pixel(args) -> int:
    config = RunConfig(method=args.method, pixel_filter=args.filter,
                       filter_mode=args.filter_mode)
    report = eval_pixel_dataset(args.dataset, config)
    payload = report_to_dict(report, args.method, args.filter)
    payload["kind"] = "pixel"
    payload["filter_mode"] = args.filter_mode
    os.makedirs(args.out, exist_ok=True)
    _write(os.path.join(args.out, "report.json"), json_text(payload))
    _write(os.path.join(args.out, "report.csv"),
           csv_text(report, args.method, args.filter))
    print(f"pixel fpr95tpr={_fmt(report.fpr95tpr)} "
          f"auroc={_fmt(report.auroc)} aupr={_fmt(report.aupr)}")
    return 2 if not_computable(report) else 0


def cmd_eval_instance(args) -> int:
    config = RunConfig(
        method=args.method, detector=args.detector,
        deltas=_parse_ints(args.deltas), iou_threshold=args.iou_threshold,
        min_size=args.min_size, roc_delta=args.roc_delta,
        include_missed=not args.map_detected_only, bins=args.bins,
    )
    report, hist = eval_instance_dataset(args.dataset, config)
    payload = report_to_dict(report, args.method, args.detector)
    payload["kind"] = "instance"
    payload["iou_threshold"] = round12(config.iou_threshold)
    payload["min_size"] = config.min_size
    payload["roc_delta"] = config.roc_delta
    payload["include_missed"] = config.include_missed
    os.makedirs(args.out, exist_ok=True)
    _write(os.path.join(args.out, "report.json"), json_text(payload))
    _write(os.path.join(args.out, "report.csv"),
           csv_text(report, args.method, args.detector))
    _write(os.path.join(args.out, "histogram.csv"), histogram_text(hist))
    if args.overlays:
        manifest = ds.load_manifest(args.dataset)
        for i in range(int(manifest["n_samples"])):
            rgb = overlay_sample(args.dataset, i, config,
                                 threshold=args.overlay_threshold)
            write_ppm(rgb, os.path.join(args.out, f"overlay_{i:05d}.ppm"))
    maps = " ".join(f"map_{d}={_fmt(v)}" for d, v in report.map_by_delta.items())
    print(f"instance fpr95tpr={_fmt(report.fpr95tpr)} "
          f"auroc={_fmt(report.auroc)} aupr={_fmt(report.aupr)} {maps}")
    return 2 if not_computable(report) else 0


def cmd_overlay(args) -> int:
    config = RunConfig(method=args.method, detector=args.detector,
                       min_size=args.min_size)
    rgb = overlay_sample(args.dataset, args.sample, config,
                         threshold=args.threshold)
    write_ppm(rgb, args.out)
    return 0


def _build_parser() -> _Parser:
    p = _Parser(prog="instanomaly",
                description="Instance-wise anomaly scoring and evaluation")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a synthetic dataset")
    g.add_argument("--out", required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--height", type=int, default=128)
    g.add_argument("--width", type=int, default=128)
    g.add_argument("--objects", type=int, default=8)
    g.add_argument("--ood-fraction", type=float, default=0.25)
    g.add_argument("--classes", type=int, default=8)
    g.add_argument("--ood-classes", type=int, default=2)
    g.add_argument("--min-size", type=int, default=8)
    g.add_argument("--max-size", type=int, default=20)
    g.add_argument("--shapes", default="rectangle,ellipse,l")
    g.add_argument("--connectivity", type=int, choices=(4, 8), default=8)
    g.add_argument("--background-noise", type=float, default=0.2)
    g.add_argument("--boundary-noise", type=float, default=0.0)
    g.add_argument("--ood-signal", type=float, default=0.9)
    g.add_argument("--in-dist-signal", type=float, default=0.1)
    g.add_argument("--signal-sigma", type=float, default=0.05)
    g.add_argument("--erosion", type=int, default=0)
    g.add_argument("--dilation", type=int, default=0)
    g.add_argument("--drop", type=float, default=0.0)
    g.add_argument("--softmax-passes", type=int, default=0)
    g.set_defaults(func=cmd_gen)

    sc = sub.add_parser("score",
                        help="write error maps derived from softmax passes")
    sc.add_argument("--dataset", required=True)
    sc.add_argument("--method", choices=("mcp", "mcdropout"), required=True)
    sc.add_argument("--out-name", default="error.iat")
    sc.set_defaults(func=cmd_score)

    ep = sub.add_parser("eval-pixel", help="pooled pixel-wise metrics")
    ep.add_argument("--dataset", required=True)
    ep.add_argument("--out", required=True)
    ep.add_argument("--method", choices=("obsnet-file", "mcp", "mcdropout"),
                    default="obsnet-file")
    ep.add_argument("--filter", choices=("none", "file", "gt"), default="none")
    ep.add_argument("--filter-mode", choices=("zero", "drop"), default="zero")
    ep.set_defaults(func=cmd_eval_pixel)

    ei = sub.add_parser("eval-instance", help="instance-wise metrics")
    ei.add_argument("--dataset", required=True)
    ei.add_argument("--out", required=True)
    ei.add_argument("--method", choices=("obsnet-file", "mcp", "mcdropout"),
                    default="obsnet-file")
    ei.add_argument("--detector", choices=("file", "gt"), default="file")
    ei.add_argument("--deltas", default="0,16,32,48")
    ei.add_argument("--iou-threshold", type=float, default=0.5)
    ei.add_argument("--min-size", type=int, default=0)
    ei.add_argument("--roc-delta", type=int, default=0)
    ei.add_argument("--map-detected-only", action="store_true")
    ei.add_argument("--bins", type=int, default=20)
    ei.add_argument("--overlays", action="store_true")
    ei.add_argument("--overlay-threshold", type=float, default=0.5)
    ei.set_defaults(func=cmd_eval_instance)

    ov = sub.add_parser("overlay", help="render one sample overlay")
    ov.add_argument("--dataset", required=True)
    ov.add_argument("--sample", type=int, required=True)
    ov.add_argument("--out", required=True)
    ov.add_argument("--method", choices=("obsnet-file", "mcp", "mcdropout"),
                    default="obsnet-file")
    ov.add_argument("--detector", choices=("file", "gt"), default="file")
    ov.add_argument("--min-size", type=int, default=0)
    ov.add_argument("--threshold", type=float, default=0.5)
    ov.set_defaults(func=cmd_overlay)
    return p


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except DegeneratePopulationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (InstanomalyError, OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
