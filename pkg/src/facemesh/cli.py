"""Command-line front end.

Exit codes: 0 success, 1 I/O or parse error, 2 domain invariant violation.
"""
from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from .brush import apply_strokes, load_strokes
from .errors import InvariantError, ParseError
from .filtering import FilterBank, FilterParams
from .harness import (HarnessConfig, MockDetector, MockPredictor, MotionScript, default_eye_spec,
                      generate_canonical_mesh, generate_sequence)
from .io import (TraceRecord, format_config, parse_config, parse_obj, read_obj, read_trace,
                 write_obj, write_trace)
from .mesh import SurfaceMesh, catmull_clark_subdivide, format_topology, load_topology
from .metrics import EyeCornerSpec, format_percent, iod_3d, iod_mad_2d
from .pipeline import FaceTracker, PipelineConfig

_EYE_KEYS = ("eye_left_outer", "eye_left_inner", "eye_right_inner", "eye_right_outer")


def config_defaults() -> dict:
    p = PipelineConfig(eye_spec=default_eye_spec())
    out = {
        "face_flag_threshold": p.face_flag_threshold,
        "margin": p.margin,
        "input_size": p.input_size,
        "z_aspect": p.z_aspect,
        "min_cutoff_hz": p.filter_params.min_cutoff_hz,
        "beta": p.filter_params.beta,
        "window_size": p.filter_params.window_size,
    }
    out.update(zip(_EYE_KEYS, p.eye_spec.indices))
    return out


def build_config(values: dict) -> PipelineConfig:
    """Merge ``key = value`` overrides onto the defaults."""
    merged = config_defaults()
    unknown = set(values) - set(merged)
    if unknown:
        raise ParseError(f"unknown config keys: {', '.join(sorted(unknown))}")
    merged.update(values)
    try:
        ints = {"input_size", "window_size", *_EYE_KEYS}
        conv = {k: int(v) if k in ints else float(v) for k, v in merged.items()}
    except ValueError as exc:
        raise ParseError(f"bad config value: {exc}") from None
    return PipelineConfig(
        eye_spec=EyeCornerSpec(*(conv[k] for k in _EYE_KEYS)),
        face_flag_threshold=conv["face_flag_threshold"],
        margin=conv["margin"],
        input_size=conv["input_size"],
        z_aspect=conv["z_aspect"],
        filter_params=FilterParams(conv["min_cutoff_hz"], conv["beta"], conv["window_size"]),
    )


def load_config(path) -> PipelineConfig:
    if path is None:
        return build_config({})
    return build_config(parse_config(Path(path).read_text()))


def _read_meshes(path):
    """An OBJ gives one mesh; a trace gives one per record, keyed by frame index."""
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        return {r.frame_index: r.vertices for r in read_trace(path)}
    return {None: parse_obj(text).vertices}


def cmd_subdivide(args):
    topo = load_topology(Path(args.topology).read_text())
    src = read_obj(args.mesh)
    mesh = SurfaceMesh(src.vertices, topo)
    write_obj(args.out, catmull_clark_subdivide(mesh, args.levels))


def cmd_track(args):
    config = load_config(args.config)
    records = read_trace(args.trace)
    landmarks = [r.vertices for r in records]
    predictor = MockPredictor(landmarks, landmarks, config.eye_spec,
                              {i: r.face_flag for i, r in enumerate(records)})
    detector = MockDetector(landmarks, config.eye_spec)
    tracker = FaceTracker(detector, predictor, config)
    out = []
    t0 = time.perf_counter()
    for i, rec in enumerate(records):
        pred = tracker(i, rec.timestamp_s)
        if pred is not None:
            out.append(TraceRecord(rec.frame_index, rec.timestamp_s, pred.face_flag, pred.mesh.vertices))
    elapsed = time.perf_counter() - t0
    write_trace(args.out, out)
    if args.report:
        reacq = [records[i].frame_index for i in tracker.reacquisition_frames]
        fps = len(records) / elapsed if elapsed > 0 else 0.0
        n = len(landmarks[0]) if landmarks else 0
        print(f"frames: {len(records)}")
        print(f"predictions: {len(out)}")
        print(f"detector calls: {tracker.detector_calls}")
        print(f"re-acquisition frames: {', '.join(map(str, reacq)) or 'none'}")
        print(f"throughput: {fps:.1f} frames/s, {fps * n:.0f} landmark-updates/s")


def cmd_filter(args):
    config = load_config(args.config)
    bank = FilterBank(config.filter_params)
    out = []
    for rec in read_trace(args.trace):
        y = bank(rec.vertices, rec.timestamp_s, iod_3d(rec.vertices, config.eye_spec))
        out.append(TraceRecord(rec.frame_index, rec.timestamp_s, rec.face_flag, y))
    write_trace(args.out, out)


def cmd_eval(args):
    spec = load_config(args.config).eye_spec
    pred, gt = _read_meshes(args.pred), _read_meshes(args.gt)
    if len(pred) == 1 and len(gt) == 1:
        pairs = [(next(iter(pred.values())), next(iter(gt.values())))]
    else:
        common = sorted(set(pred) & set(gt))
        if not common:
            raise InvariantError("prediction and ground truth share no frames")
        pairs = [(pred[k], gt[k]) for k in common]
    print(format_percent(float(np.mean([iod_mad_2d(p, g, spec) for p, g in pairs]))))


def cmd_brush(args):
    mesh = read_obj(args.mesh)
    mesh.require_topology()
    strokes = load_strokes(Path(args.strokes).read_text())
    write_obj(args.out, apply_strokes(mesh, strokes, args.frozen_geodesics))


def _parse_flags(items):
    script = {}
    for item in items or []:
        frame, _, value = item.partition(":")
        try:
            script[int(frame)] = float(value) if value else 0.0
        except ValueError:
            raise ParseError(f"bad --flag-drop entry {item!r}, expected FRAME[:FLAG]") from None
    return script


def cmd_synth(args):
    shape = None
    if args.shape:
        try:
            shape = tuple(int(s) for s in args.shape.lower().split("x"))
        except ValueError:
            raise ParseError(f"bad --shape {args.shape!r}, expected NUxNV") from None
    mesh, spec = generate_canonical_mesh(args.kind, shape=shape, z_aspect=args.z_aspect)
    if args.motion == "static":
        script = MotionScript.static(args.frames, args.fps)
    elif args.motion == "linear":
        script = MotionScript.linear(args.frames, args.fps, translation_step=(args.step, 0.0, 0.0),
                                     rotation_step=args.rotation_step)
    else:
        script = MotionScript.wobble(args.frames, args.fps)
    flags = _parse_flags(args.flag_drop)
    hcfg = HarnessConfig(noise_sigma=args.noise, flag_script=flags, seed=args.seed, z_aspect=args.z_aspect)
    seq = generate_sequence(mesh, script, hcfg)
    write_trace(args.out, [TraceRecord(f.index, f.timestamp, flags.get(f.index, 1.0), f.noisy.vertices)
                           for f in seq])
    if args.gt_out:
        write_trace(args.gt_out, [TraceRecord(f.index, f.timestamp, 1.0, f.ground_truth.vertices)
                                  for f in seq])
    if args.config_out:
        values = config_defaults()
        values.update(zip(_EYE_KEYS, spec.indices))
        values["z_aspect"] = args.z_aspect
        Path(args.config_out).write_text(format_config(values))
    if args.obj_out:
        write_obj(args.obj_out, mesh)
    if args.topology_out:
        Path(args.topology_out).write_text(format_topology(mesh.topology))


def cmd_bench(args):
    from .bench import run_bench

    stats, aggregate = run_bench(args.frames, args.landmarks, args.streams, args.seed)
    for s in stats:
        print(f"stream {s.stream}: {s.frames} frames, {s.frames_per_second:.1f} frames/s, "
              f"{s.landmark_updates_per_second:.0f} landmark-updates/s")
    print(f"aggregate: {aggregate:.1f} frames/s, {aggregate * args.landmarks:.0f} landmark-updates/s")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="facemesh", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("subdivide", help="Catmull-Clark subdivide a quad mesh")
    p.add_argument("--topology", required=True)
    p.add_argument("--mesh", required=True, help="OBJ providing vertex positions")
    p.add_argument("--levels", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_subdivide)

    p = sub.add_parser("track", help="run the tracking pipeline over a landmark trace")
    p.add_argument("--trace", required=True)
    p.add_argument("--config")
    p.add_argument("--out", required=True)
    p.add_argument("--report", action="store_true")
    p.set_defaults(func=cmd_track)

    p = sub.add_parser("filter", help="temporally filter a landmark trace")
    p.add_argument("--trace", required=True)
    p.add_argument("--config")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("eval", help="IOD-normalized MAD between two OBJ or trace files")
    p.add_argument("--pred", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--config")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("brush", help="apply annotation brush strokes to an OBJ")
    p.add_argument("--mesh", required=True)
    p.add_argument("--strokes", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--frozen-geodesics", action="store_true")
    p.set_defaults(func=cmd_brush)

    p = sub.add_parser("synth", help="emit a synthetic landmark trace")
    p.add_argument("--out", required=True)
    p.add_argument("--gt-out")
    p.add_argument("--config-out")
    p.add_argument("--obj-out")
    p.add_argument("--topology-out")
    p.add_argument("--kind", choices=["ellipsoid", "grid"], default="ellipsoid")
    p.add_argument("--shape", help="grid size as NUxNV")
    p.add_argument("--frames", type=int, default=100)
    p.add_argument("--fps", type=float, default=30.0)
    p.add_argument("--motion", choices=["static", "linear", "wobble"], default="wobble")
    p.add_argument("--step", type=float, default=1.0, help="x translation per frame (linear)")
    p.add_argument("--rotation-step", type=float, default=0.0, help="radians per frame (linear)")
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--z-aspect", type=float, default=0.5)
    p.add_argument("--flag-drop", action="append", metavar="FRAME[:FLAG]")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("bench", help="measure pipeline throughput (predictor excluded)")
    p.add_argument("--frames", type=int, default=10000)
    p.add_argument("--landmarks", type=int, default=468)
    p.add_argument("--streams", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (ParseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (InvariantError, IndexError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
