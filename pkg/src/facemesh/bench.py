"""Pipeline throughput measurement on synthetic streams.

Time spent inside the detector and predictor stand-ins is measured separately
and subtracted, so the reported rate covers the pipeline machinery only.
"""
from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from .errors import InvariantError
from .filtering import FilterParams
from .harness import (HarnessConfig, MotionScript, generate_canonical_mesh, generate_sequence,
                      mock_detector, mock_predictor)
from .pipeline import FaceTracker, PipelineConfig


@dataclass
class StreamStats:
    stream: int
    frames: int
    landmarks: int
    predictions: int
    detector_calls: int
    pipeline_seconds: float

    @property
    def frames_per_second(self) -> float:
        return self.frames / self.pipeline_seconds if self.pipeline_seconds > 0 else math.inf

    @property
    def landmark_updates_per_second(self) -> float:
        return self.frames_per_second * self.landmarks


class _Timed:
    def __init__(self, inner, method):
        self.inner = inner
        self.seconds = 0.0
        self._method = method

    def __getattr__(self, name):
        fn = getattr(self.inner, name)
        if name != self._method:
            return fn

        def wrapped(*args, **kwargs):
            t0 = time.perf_counter()
            try:
                return fn(*args, **kwargs)
            finally:
                self.seconds += time.perf_counter() - t0

        return wrapped


def patch_shape(landmarks: int) -> tuple[int, int]:
    """Most square-ish grid (nu >= nv >= 2) holding exactly ``landmarks`` vertices."""
    for nv in range(int(math.isqrt(landmarks)), 1, -1):
        if landmarks % nv == 0:
            return landmarks // nv, nv
    raise InvariantError(f"cannot lay out {landmarks} landmarks on a quad grid")


def run_stream(frames: int = 1000, landmarks: int = 468, seed: int = 0, stream: int = 0,
               noise_sigma: float = 1.0) -> StreamStats:
    mesh, spec = generate_canonical_mesh("ellipsoid", shape=patch_shape(landmarks))
    script = MotionScript.wobble(frames)
    hcfg = HarnessConfig(noise_sigma=noise_sigma, seed=seed + stream)
    seq = generate_sequence(mesh, script, hcfg)
    detector = _Timed(mock_detector(seq, spec), "detect")
    predictor = _Timed(mock_predictor(seq, hcfg, spec), "predict")
    config = PipelineConfig(eye_spec=spec, filter_params=FilterParams())
    tracker = FaceTracker(detector, predictor, config)

    produced = 0
    t0 = time.perf_counter()
    for f in seq:
        if tracker(f.index, f.timestamp) is not None:
            produced += 1
    total = time.perf_counter() - t0
    return StreamStats(stream, frames, landmarks, produced, tracker.detector_calls,
                       max(total - detector.seconds - predictor.seconds, 1e-12))


def run_bench(frames: int = 1000, landmarks: int = 468, streams: int = 1, seed: int = 0):
    """Run ``streams`` independent streams (in separate processes when > 1).

    Returns the per-stream stats and the aggregate rate in frames/s, taken as
    total frames over the slowest stream's pipeline time.
    """
    if frames < 1 or streams < 1:
        raise InvariantError("frames and streams must be >= 1")
    if streams == 1:
        stats = [run_stream(frames, landmarks, seed, 0)]
    else:
        with ProcessPoolExecutor(max_workers=streams) as pool:
            futures = [pool.submit(run_stream, frames, landmarks, seed, k) for k in range(streams)]
            stats = [f.result() for f in futures]
    aggregate = sum(s.frames for s in stats) / max(s.pipeline_seconds for s in stats)
    return stats, aggregate
