"""Command-line entry points for each pipeline phase.

Subcommands mirror the workflow: ``calibrate`` turns baseline clicks into
a config entry, ``synth`` renders test scenes, ``build-ontology`` ingests a
label file, ``classify`` runs the full pipeline, ``evaluate`` scores the
output, and ``serve`` starts the annotation HTTP service.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .calibration import Calibration, angle_from_baseline
from .config import RunConfig, load_config, save_config
from .evaluation import (evaluate_detections, format_report, load_ground_truth,
                         read_detections)
from .ontology import read_label_rows
from .pipeline import STAGES, build_ontology_from_labels, run_pipeline
from .synthetic import load_scene_spec, preset_scene, write_scene


def _parse_point(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected 'x,y', got {text!r}")
    return float(parts[0]), float(parts[1])


def _parse_rect(text: str) -> tuple[int, int, int, int]:
    parts = text.split(",")
    if len(parts) != 4:
        raise argparse.ArgumentTypeError(f"expected 'left,top,width,height', got {text!r}")
    return tuple(int(v) for v in parts)  # type: ignore[return-value]


def cmd_calibrate(args) -> int:
    angle = angle_from_baseline(args.p1, args.p2)
    print(f"angle_deg = {angle!r}")
    if args.crop:
        left, top, width, height = args.crop
        print(f"crop = {left},{top},{width},{height}")
    if args.write:
        if not args.crop:
            print("--write needs --crop", file=sys.stderr)
            return 2
        cfg = load_config(args.config)
        cfg.calibration = Calibration(angle, args.crop)
        save_config(cfg, args.config)
        print(f"wrote calibration to {args.config}")
    return 0


def cmd_synth(args) -> int:
    if args.preset:
        spec = preset_scene(args.preset)
    elif args.spec:
        spec = load_scene_spec(args.spec)
    else:
        print("synth needs --spec or --preset", file=sys.stderr)
        return 2
    manifest, gt_path = write_scene(spec, args.seed, args.out)
    print(f"wrote {spec.n_frames} frames to {args.out}")
    print(f"manifest: {manifest}")
    print(f"ground truth: {gt_path}")
    return 0


def cmd_build_ontology(args) -> int:
    cfg = load_config(args.config)
    rows = read_label_rows(args.labels)
    out_path = Path(args.out) if args.out else cfg.ontology_path
    if out_path is None:
        print("no ontology output path (use --out or set [paths] ontology)",
              file=sys.stderr)
        return 2
    lib = build_ontology_from_labels(cfg, rows, out_path)
    print(f"wrote {len(lib)} entries to {out_path}")
    return 0


def cmd_classify(args) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    run = run_pipeline(cfg, out_dir=args.out,
                       dump_stages=tuple(args.dump_stage or ()),
                       resume_stage=args.resume_stage)
    print(f"detections: {run.detections_path} ({len(run.detections)} regions)")
    print(f"per-frame counts: {run.counts_path}")
    if run.refine_capped_frames:
        print(f"warning: refinement hit the iteration cap on frames "
              f"{run.refine_capped_frames}", file=sys.stderr)
    return 0


def cmd_evaluate(args) -> int:
    truth = load_ground_truth(args.truth)
    detections = read_detections(args.pred)
    report = evaluate_detections(detections, truth, args.iou)
    print(format_report(report))
    if args.out:
        Path(args.out).write_text(json.dumps(report.to_json_dict(), indent=2) + "\n")
        print(f"report: {args.out}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service.app import create_app

    cfg = load_config(args.config)
    app = create_app(cfg, config_path=Path(args.config))
    try:
        uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    except OSError as exc:
        print(f"cannot bind {args.host}:{args.port}: {exc}", file=sys.stderr)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="roadcov",
        description="Car/truck classification from fixed highway cameras.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("calibrate", help="turn two baseline clicks into a config entry")
    p.add_argument("--config", required=True)
    p.add_argument("--p1", type=_parse_point, required=True, metavar="X,Y")
    p.add_argument("--p2", type=_parse_point, required=True, metavar="X,Y")
    p.add_argument("--crop", type=_parse_rect, metavar="L,T,W,H")
    p.add_argument("--write", action="store_true",
                   help="persist into the config file")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("synth", help="render a synthetic scene with ground truth")
    p.add_argument("--spec", help="scene spec file")
    p.add_argument("--preset", help="built-in scene name")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("build-ontology", help="build the library from a label file")
    p.add_argument("--config", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_build_ontology)

    p = sub.add_parser("classify", help="run the full pipeline")
    p.add_argument("--config", required=True)
    p.add_argument("--out", help="output directory (default: config [paths] out)")
    p.add_argument("--seed", type=int)
    p.add_argument("--dump-stage", action="append", choices=STAGES,
                   help="write a resumable checkpoint for this stage")
    p.add_argument("--resume-stage", choices=STAGES)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("evaluate", help="score detections against ground truth")
    p.add_argument("--truth", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--iou", type=float, default=0.5)
    p.add_argument("--out", help="write the JSON report here")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("serve", help="start the annotation HTTP service")
    p.add_argument("--config", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8700)
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
