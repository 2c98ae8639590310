"""Command-line pipeline: ingestion, decomposition, sweep, evaluation, reports.

Subcommands
-----------
decompose
    Write every detail plane (min-max normalized for display) and the
    smooth residual.
segment
    Write one candidate mask per level from 3 up to the requested depth.
evaluate
    Compare every candidate mask against a ground-truth mask; write the
    per-level metrics table, agreement overlays, and the best mask.
auto
    Full pipeline, emitting only the best mask, its overlay, and the run
    manifest. With ``--batch`` it processes a directory of image pairs.

Exit codes: 0 success, 1 usage error, 2 data/validation error. Set the
``TRACKSEG_LOG`` environment variable (debug/info/warning) to control log
verbosity.
"""

import argparse
import csv
import io
import json
import logging
import os
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__, imagecore, metrics, segmentation, starlet
from .errors import DimensionMismatch, TrackSegError

log = logging.getLogger("trackseg")

GT_SUFFIX = "_gt"


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; the CLI contract reserves 2 for
    # data errors and uses 1 for usage.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    """Echo of one resolved command line."""

    command: str
    input_path: Path | None
    gt_path: Path | None
    max_level: int
    polarity: str
    threshold: float
    out_dir: Path
    report_format: str
    dump_raw: bool
    batch_dir: Path | None

    def seg_config(self):
        return segmentation.SegmentationConfig(
            max_level=self.max_level, polarity=self.polarity, threshold=self.threshold
        )

    def echo(self):
        return {
            "command": self.command,
            "input": str(self.input_path) if self.input_path else None,
            "gt": str(self.gt_path) if self.gt_path else None,
            "levels": self.max_level,
            "polarity": self.polarity,
            "threshold": self.threshold,
            "out": str(self.out_dir),
            "format": self.report_format,
            "dump_raw": self.dump_raw,
            "batch": str(self.batch_dir) if self.batch_dir else None,
        }


def _build_parser():
    parser = _Parser(
        prog="trackseg",
        description="Segment dark linear features in grayscale micrographs "
        "by multiscale detail accumulation with metric-driven depth selection.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add_shared(p, with_polarity=True):
        p.add_argument(
            "--levels", type=int, default=9, choices=range(3, 13), metavar="N",
            help="decomposition depth, 3..12 (default 9)",
        )
        p.add_argument("--out", type=Path, default=Path("trackseg-out"), help="output directory")
        if with_polarity:
            p.add_argument(
                "--polarity", choices=segmentation.POLARITIES, default="dark",
                help="whether features are darker or brighter than their surroundings",
            )
            p.add_argument(
                "--threshold", type=float, default=0.0, metavar="T",
                help="binarization threshold on the accumulated detail value (default 0)",
            )

    p = sub.add_parser("decompose", help="write detail planes and the smooth residual")
    p.add_argument("input", type=Path, help="input image (PNG or binary PGM/PPM)")
    add_shared(p, with_polarity=False)
    p.add_argument(
        "--dump-raw", action="store_true",
        help="also write raw (unnormalized) planes as PFM float maps",
    )
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("segment", help="write one candidate mask per level")
    p.add_argument("input", type=Path, help="input image")
    add_shared(p)
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("evaluate", help="score every candidate mask against ground truth")
    p.add_argument("input", type=Path, help="input image")
    p.add_argument("--gt", type=Path, required=True, help="ground-truth mask image")
    add_shared(p)
    p.add_argument("--format", choices=("csv", "json"), default="csv", help="metrics table format")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("auto", help="emit only the best mask, overlay, and manifest")
    p.add_argument("input", type=Path, nargs="?", help="input image (omit with --batch)")
    p.add_argument("--gt", type=Path, help="ground-truth mask image")
    p.add_argument("--batch", type=Path, metavar="DIR",
                   help="process every <stem>.png / <stem>_gt.png pair in DIR")
    add_shared(p)
    p.add_argument("--format", choices=("csv", "json"), default="csv", help="metrics table format")
    p.set_defaults(func=cmd_auto)

    return parser


def main(argv=None):
    logging.basicConfig()
    log.setLevel(getattr(logging, os.environ.get("TRACKSEG_LOG", "WARNING").upper(), logging.WARNING))
    parser = _build_parser()
    args = parser.parse_args(argv)

    if args.command == "auto":
        if args.batch is None and (args.input is None or args.gt is None):
            parser.error("auto requires an input image and --gt, or --batch DIR")
        if args.batch is not None and (args.input is not None or args.gt is not None):
            parser.error("--batch cannot be combined with a single input/--gt pair")

    cfg = RunConfig(
        command=args.command,
        input_path=getattr(args, "input", None),
        gt_path=getattr(args, "gt", None),
        max_level=args.levels,
        polarity=getattr(args, "polarity", "dark"),
        threshold=getattr(args, "threshold", 0.0),
        out_dir=args.out,
        report_format=getattr(args, "format", "csv"),
        dump_raw=getattr(args, "dump_raw", False),
        batch_dir=getattr(args, "batch", None),
    )
    try:
        return args.func(cfg)
    except TrackSegError as exc:
        print(f"trackseg: error: {exc}", file=sys.stderr)
        return 2


def entry():
    raise SystemExit(main())


# ---------------------------------------------------------------------------
# Subcommands


def cmd_decompose(cfg):
    timings = {}
    gray = _timed(timings, "load", _load_grayscale, cfg.input_path)
    dec = _timed(timings, "decompose", starlet.decompose, gray, cfg.max_level)

    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    outputs = []
    for level, plane in enumerate(dec.details, start=1):
        outputs.append(_write_image(cfg.out_dir, f"detail_{level:02d}.png", _visualize(plane)))
        if cfg.dump_raw:
            name = f"detail_{level:02d}.pfm"
            imagecore.save_float_map(plane, cfg.out_dir / name)
            outputs.append(name)
    outputs.append(_write_image(cfg.out_dir, "smooth.png", dec.smooth))
    if cfg.dump_raw:
        imagecore.save_float_map(dec.smooth, cfg.out_dir / "smooth.pfm")
        outputs.append("smooth.pfm")

    _write_manifest(cfg, outputs, timings)
    return 0


def cmd_segment(cfg):
    timings = {}
    gray = _timed(timings, "load", _load_grayscale, cfg.input_path)
    masks = _sweep(timings, gray, cfg)

    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    outputs = []
    for level, mask in masks:
        name = f"mask_L{level}.png"
        imagecore.save_mask(mask, cfg.out_dir / name)
        outputs.append(name)

    _write_manifest(cfg, outputs, timings)
    return 0


def cmd_evaluate(cfg):
    timings = {}
    gray, gt = _timed(timings, "load", _load_pair, cfg.input_path, cfg.gt_path)
    masks = _sweep(timings, gray, cfg)
    rows, report = _timed(timings, "evaluate", _score, masks, gt)

    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    outputs = [_write_metrics_table(cfg, rows)]
    for level, mask in masks:
        name = f"overlay_L{level}.png"
        imagecore.save_image(metrics.comparison_overlay(mask, gt), cfg.out_dir / name)
        outputs.append(name)
    imagecore.save_mask(report.optimal_mask, cfg.out_dir / "mask_optimal.png")
    outputs.append("mask_optimal.png")

    _write_manifest(cfg, outputs, timings, rows=rows, optimal_level=report.optimal_level)
    return 0


def cmd_auto(cfg):
    if cfg.batch_dir is not None:
        return _auto_batch(cfg)
    _auto_single(cfg, cfg.input_path, cfg.gt_path, cfg.out_dir)
    return 0


def _auto_single(cfg, input_path, gt_path, out_dir):
    timings = {}
    gray, gt = _timed(timings, "load", _load_pair, input_path, gt_path)
    masks = _sweep(timings, gray, cfg)
    rows, report = _timed(timings, "evaluate", _score, masks, gt)

    out_dir.mkdir(parents=True, exist_ok=True)
    imagecore.save_mask(report.optimal_mask, out_dir / "mask_optimal.png")
    imagecore.save_image(
        metrics.comparison_overlay(report.optimal_mask, gt), out_dir / "overlay_optimal.png"
    )
    outputs = ["mask_optimal.png", "overlay_optimal.png"]
    _write_manifest(
        cfg, outputs, timings, rows=rows, optimal_level=report.optimal_level,
        out_dir=out_dir, input_path=input_path, gt_path=gt_path,
    )
    return report


def _auto_batch(cfg):
    pairs, orphans = _pair_batch_files(cfg.batch_dir)
    for orphan in orphans:
        log.warning("skipping %s: no matching pair", orphan)

    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    summary = []
    for stem, image_path, gt_path in pairs:
        report = _auto_single(cfg, image_path, gt_path, cfg.out_dir / stem)
        chosen = next(m for m in report.per_level if m.level == report.optimal_level)
        summary.append((stem, chosen))

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        ["stem", "optimal_level", "precision_pct", "recall_pct", "accuracy_pct", "mcc_pct"]
    )
    for stem, m in summary:
        writer.writerow(
            [stem, m.level, _pct(m.precision), _pct(m.recall), _pct(m.accuracy), _pct(m.mcc)]
        )
    imagecore.write_bytes_atomic(cfg.out_dir / "summary.csv", buf.getvalue().encode("ascii"))
    return 0


# ---------------------------------------------------------------------------
# Pipeline helpers


def _timed(timings, stage, fn, *args):
    start = time.perf_counter()
    result = fn(*args)
    timings[stage] = round(time.perf_counter() - start, 6)
    return result


def _load_grayscale(path):
    img = imagecore.load_image(path)
    if img.ndim == 3:
        img = imagecore.to_grayscale(img)
    return img


def _load_pair(input_path, gt_path):
    gray = _load_grayscale(input_path)
    gt = imagecore.load_mask(gt_path)
    if gray.shape != gt.shape:
        raise DimensionMismatch(
            f"input image is {gray.shape[1]}x{gray.shape[0]} but ground truth "
            f"is {gt.shape[1]}x{gt.shape[0]}"
        )
    return gray, gt


def _sweep(timings, gray, cfg):
    seg_cfg = cfg.seg_config()
    dec = _timed(timings, "decompose", starlet.decompose, gray, seg_cfg.max_level)
    start = time.perf_counter()
    masks = [(s.level, segmentation.binarize(s, seg_cfg)) for s in
             segmentation.detail_sums(dec, seg_cfg)]
    timings["sweep"] = round(time.perf_counter() - start, 6)
    return masks


def _score(masks, gt):
    rows = [(level, metrics.confusion(mask, gt)) for level, mask in masks]
    report = metrics.select_optimal(rows, masks=dict(masks))
    return rows, report


def _pair_batch_files(batch_dir):
    batch_dir = Path(batch_dir)
    pairs, orphans = [], []
    gt_names = set()
    for path in sorted(batch_dir.glob("*.png")):
        if path.stem.endswith(GT_SUFFIX):
            gt_names.add(path.name)
            continue
        gt_path = path.with_name(f"{path.stem}{GT_SUFFIX}.png")
        if gt_path.exists():
            pairs.append((path.stem, path, gt_path))
        else:
            orphans.append(path.name)
    paired_gt = {f"{stem}{GT_SUFFIX}.png" for stem, _, _ in pairs}
    orphans.extend(sorted(gt_names - paired_gt))
    return pairs, orphans


# ---------------------------------------------------------------------------
# Artifact writers


def _visualize(plane):
    # Signed planes are min-max mapped onto 8 bits; a flat plane maps to
    # mid-gray so zero detail reads as "no structure".
    low, high = float(plane.min()), float(plane.max())
    if high == low:
        return np.full(plane.shape, 128, dtype=np.uint8)
    return np.rint((plane - low) / (high - low) * 255.0).astype(np.uint8)


def _write_image(out_dir, name, image):
    imagecore.save_image(image, out_dir / name)
    return name


def _pct(value):
    return f"{value:.5f}"


def _metric_row(level, counts, level_metrics):
    return {
        "level": level,
        "tp": counts.tp,
        "tn": counts.tn,
        "fp": counts.fp,
        "fn": counts.fn,
        "precision_pct": level_metrics.precision,
        "recall_pct": level_metrics.recall,
        "accuracy_pct": level_metrics.accuracy,
        "mcc_pct": level_metrics.mcc,
    }


def _table_rows(rows):
    table = []
    for level, counts in rows:
        precision, recall, accuracy = metrics.precision_recall_accuracy(counts)
        lm = metrics.LevelMetrics(
            level=level, precision=precision, recall=recall, accuracy=accuracy,
            mcc=100.0 * metrics.mcc(counts),
        )
        table.append(_metric_row(level, counts, lm))
    return table


def _write_metrics_table(cfg, rows):
    table = _table_rows(rows)
    if cfg.report_format == "json":
        payload = [
            {k: (round(v, 5) if isinstance(v, float) else v) for k, v in row.items()}
            for row in table
        ]
        body = json.dumps({"levels": payload}, indent=2, sort_keys=True) + "\n"
        name = "metrics.json"
    else:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(
            ["level", "tp", "tn", "fp", "fn",
             "precision_pct", "recall_pct", "accuracy_pct", "mcc_pct"]
        )
        for row in table:
            writer.writerow(
                [row["level"], row["tp"], row["tn"], row["fp"], row["fn"],
                 _pct(row["precision_pct"]), _pct(row["recall_pct"]),
                 _pct(row["accuracy_pct"]), _pct(row["mcc_pct"])]
            )
        body = buf.getvalue()
        name = "metrics.csv"
    imagecore.write_bytes_atomic(cfg.out_dir / name, body.encode("ascii"))
    return name


def _write_manifest(cfg, outputs, timings, rows=None, optimal_level=None,
                    out_dir=None, input_path=None, gt_path=None):
    out_dir = out_dir or cfg.out_dir
    echo = cfg.echo()
    if input_path is not None:
        echo["input"] = str(input_path)
    if gt_path is not None:
        echo["gt"] = str(gt_path)
    manifest = {
        "tool": "trackseg",
        "version": __version__,
        "config": echo,
        "outputs": sorted(outputs + ["manifest.json"]),
        "timings_sec": timings,
    }
    if optimal_level is not None:
        manifest["optimal_level"] = optimal_level
    if rows is not None:
        manifest["per_level"] = [
            {k: (round(v, 5) if isinstance(v, float) else v) for k, v in row.items()}
            for row in _table_rows(rows)
        ]
    body = json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    imagecore.write_bytes_atomic(out_dir / "manifest.json", body.encode("ascii"))
