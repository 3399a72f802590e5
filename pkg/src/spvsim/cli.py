"""Command-line entry point.

Subcommands: render stills, process raw video streams, benchmark the
pipeline, export sensitivity maps, and launch the streaming service.
Exit codes: 0 ok, 1 config/validation error, 2 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time

import numpy as np

from .config import load_config
from .errors import ValidationError
from .images import RawVideoReader, RawVideoWriter, load_gray, save_gray
from .model import export_spvm
from .pipeline import build_pipeline, process_frame
from .scenes import bar_frame
from .vision import Frame, GazeTransform, preprocess

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_IO = 2


def _parse_gaze(text: str | None) -> GazeTransform:
    if not text:
        return GazeTransform()
    parts = text.split(",")
    if len(parts) != 3:
        raise ValidationError(f"--gaze expects DX,DY,ROT, got {text!r}")
    try:
        dx, dy, rot = (float(p) for p in parts)
    except ValueError as exc:
        raise ValidationError(f"--gaze values must be numeric: {exc}") from exc
    return GazeTransform(dx, dy, rot)


def _montage(original: Frame, pre: Frame, percept: Frame) -> Frame:
    """Side-by-side original / preprocessed / percept panels at input height."""
    h = original.height
    scale = max(1, h // percept.height)
    big = np.kron(percept.data, np.ones((scale, scale)))
    pad_h = h - big.shape[0]
    if pad_h > 0:
        big = np.pad(big, ((pad_h // 2, pad_h - pad_h // 2), (0, 0)))
    else:
        big = big[:h]
    gap = np.full((h, 4), 0.5)
    return Frame(np.hstack([original.data, gap, pre.data, gap, big]))


def cmd_render(args) -> int:
    try:
        cfg = load_config(args.config, args.set or [])
        gaze = _parse_gaze(args.gaze)
        state = build_pipeline(cfg)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        frame = load_gray(args.infile)
    except OSError as exc:
        print(f"error: cannot read {args.infile}: {exc}", file=sys.stderr)
        return EXIT_IO
    report = process_frame(state, frame, gaze)
    out = report.percept
    if args.montage:
        out = _montage(frame, preprocess(frame, cfg.preprocess), report.percept)
    try:
        save_gray(out, args.outfile)
    except OSError as exc:
        print(f"error: cannot write {args.outfile}: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def _load_trace(path: str) -> dict[int, GazeTransform]:
    trace: dict[int, GazeTransform] = {}
    try:
        with open(path, newline="") as fh:
            for lineno, row in enumerate(csv.reader(fh), start=1):
                if not row or not row[0].strip():
                    continue
                if lineno == 1 and not row[0].strip().lstrip("-").isdigit():
                    continue  # header row
                if len(row) != 4:
                    raise ValidationError(
                        f"{path}:{lineno}: expected frame_index,dx_deg,dy_deg,rot_deg"
                    )
                try:
                    idx = int(row[0])
                    dx, dy, rot = (float(v) for v in row[1:])
                except ValueError as exc:
                    raise ValidationError(f"{path}:{lineno}: {exc}") from exc
                trace[idx] = GazeTransform(dx, dy, rot)
    except OSError as exc:
        raise ValidationError(f"cannot read trace {path}: {exc}") from exc
    return trace


def cmd_video(args) -> int:
    try:
        cfg = load_config(args.config, args.set or [])
        state = build_pipeline(cfg)
        trace = _load_trace(args.trace) if args.trace else {}
        reader = RawVideoReader(args.infile)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    gaze = GazeTransform()
    try:
        with RawVideoWriter(
            args.outfile, cfg.grid.width, cfg.grid.height, reader.fps
        ) as writer:
            for i, frame in enumerate(reader):
                gaze = trace.get(i, gaze)  # gaze persists between trace rows
                writer.write(process_frame(state, frame, gaze).percept)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def cmd_bench(args) -> int:
    try:
        cfg = load_config(args.config, args.set or [])
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    t0 = time.perf_counter()
    state = build_pipeline(cfg)
    build_s = time.perf_counter() - t0

    stages = {"preprocess": [], "encode": [], "render": []}
    totals = []
    frames = 0
    deadline = time.perf_counter() + args.seconds
    while time.perf_counter() < deadline:
        frame = bar_frame(frames / 30.0)
        t0 = time.perf_counter()
        report = process_frame(state, frame)
        totals.append((time.perf_counter() - t0) * 1e6)
        stages["preprocess"].append(report.preprocess_us)
        stages["encode"].append(report.encode_us)
        stages["render"].append(report.render_us)
        frames += 1

    def summary(vals):
        if not vals:
            return {"mean_us": None, "p95_us": None}
        return {
            "mean_us": float(np.mean(vals)),
            "p95_us": float(np.percentile(vals, 95)),
        }

    elapsed = sum(totals) / 1e6
    out = {
        "build_s": build_s,
        "frames": frames,
        "fps": frames / elapsed if elapsed > 0 else None,
        "total": summary(totals),
        "stages": {k: summary(v) for k, v in stages.items()},
    }
    print(json.dumps(out, indent=2))
    return EXIT_OK


def cmd_export_map(args) -> int:
    try:
        cfg = load_config(args.config, args.set or [])
        state = build_pipeline(cfg)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        with open(args.outfile, "wb") as fh:
            fh.write(export_spvm(state.smap))
    except OSError as exc:
        print(f"error: cannot write {args.outfile}: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def cmd_serve(args) -> int:
    try:
        cfg = load_config(args.config, args.set or [])
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    import uvicorn

    from .server import create_app

    uvicorn.run(create_app(cfg), host=args.bind, port=args.port, log_level="info")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spvsim", description="Simulated prosthetic vision engine"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", required=True, help="pipeline config JSON")
        p.add_argument(
            "--set",
            action="append",
            metavar="KEY=VALUE",
            help="dotted-path config override (repeatable)",
        )

    p = sub.add_parser("render", help="render a still image to a percept")
    add_common(p)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", dest="outfile", required=True)
    p.add_argument("--gaze", metavar="DX,DY,ROT")
    p.add_argument("--montage", action="store_true")
    p.set_defaults(fn=cmd_render)

    p = sub.add_parser("video", help="process a raw grayscale video stream")
    add_common(p)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", dest="outfile", required=True)
    p.add_argument("--trace", help="gaze trace CSV (frame_index,dx,dy,rot)")
    p.set_defaults(fn=cmd_video)

    p = sub.add_parser("bench", help="benchmark the pipeline on a synthetic scene")
    add_common(p)
    p.add_argument("--seconds", type=float, default=5.0)
    p.set_defaults(fn=cmd_bench)

    p = sub.add_parser("export-map", help="write the sensitivity map (SPVM binary)")
    add_common(p)
    p.add_argument("--out", dest="outfile", required=True)
    p.set_defaults(fn=cmd_export_map)

    p = sub.add_parser("serve", help="run the streaming service")
    add_common(p)
    p.add_argument("--port", type=int, required=True)
    p.add_argument("--bind", default="127.0.0.1")
    p.set_defaults(fn=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
