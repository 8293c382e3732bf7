import math

import numpy as np
import pytest

from facemesh.crop import RotatedRect
from facemesh.errors import TimestampError
from facemesh.filtering import FilterParams
from facemesh.harness import HarnessConfig, MotionScript, generate_sequence, mock_detector, mock_predictor
from facemesh.pipeline import (Detection, FaceTracker, PipelineConfig, TrackingState, process_frame,
                               select_detection, step)

PASS_THROUGH = FilterParams.pass_through()


def make(face, frames=100, motion=None, fail=(), **hcfg):
    mesh, spec = face
    cfg = HarnessConfig(**hcfg)
    seq = generate_sequence(mesh, motion or MotionScript.wobble(frames), cfg)
    return seq, mock_detector(seq, spec, fail), mock_predictor(seq, cfg, spec), spec


def test_detector_once_when_flag_high(face):
    seq, det, pred, spec = make(face, noise_sigma=1.0)
    tracker = FaceTracker(det, pred, PipelineConfig(spec))
    outputs = [tracker(f.index, f.timestamp) for f in seq]
    assert det.calls == 1 and tracker.detector_calls == 1
    assert all(o is not None for o in outputs)
    assert tracker.reacquisition_frames == []


def test_reacquisition_at_scripted_frame(face):
    seq, det, pred, spec = make(face, flag_script={50: 0.0})
    tracker = FaceTracker(det, pred, PipelineConfig(spec))
    for f in seq:
        out = tracker(f.index, f.timestamp)
        if f.index == 50:
            assert out is not None
            assert len(tracker.state.filter) == 1
    assert det.called_at == [0, 50]
    assert tracker.reacquisition_frames == [50]


def test_no_detection_on_first_frame(face):
    seq, det, pred, spec = make(face, frames=5, fail={0})
    state = TrackingState.initial()
    state, out = process_frame(state, 0, seq[0].timestamp, det, pred, PipelineConfig(spec))
    assert out is None and not state.tracking
    state, out = process_frame(state, 1, seq[1].timestamp, det, pred, PipelineConfig(spec))
    assert out is not None and state.tracking
    assert det.calls == 2


def test_failed_reacquisition_resets(face):
    seq, det, pred, spec = make(face, frames=20, fail={10}, flag_script={10: 0.0})
    tracker = FaceTracker(det, pred, PipelineConfig(spec))
    for f in seq[:10]:
        tracker(f.index, f.timestamp)
    assert tracker(10, seq[10].timestamp) is None
    assert not tracker.state.tracking
    assert tracker.state.filter.is_empty and len(tracker.state.filter) == 0
    assert tracker(11, seq[11].timestamp) is not None
    assert det.called_at == [0, 10, 11]


def test_retry_still_low(face):
    seq, det, pred, spec = make(face, frames=20, flag_script={7: (0.2, 0.3)})
    tracker = FaceTracker(det, pred, PipelineConfig(spec))
    outs = [tracker(f.index, f.timestamp) for f in seq[:8]]
    assert outs[7] is None and not tracker.state.tracking and tracker.state.filter.is_empty


def test_low_flag_straight_after_detection(face):
    seq, det, pred, spec = make(face, frames=5, flag_script={0: 0.0})
    tracker = FaceTracker(det, pred, PipelineConfig(spec))
    assert tracker(0, seq[0].timestamp) is None
    assert det.calls == 1
    assert tracker(1, seq[1].timestamp) is not None


def test_timestamps_must_increase(face):
    seq, det, pred, spec = make(face, frames=5)
    tracker = FaceTracker(det, pred, PipelineConfig(spec))
    tracker(0, 0.5)
    with pytest.raises(TimestampError):
        tracker(1, 0.5)


def test_detection_count_invariant(face):
    drops = {5: 0.0, 17: 0.1, 18: 0.2, 60: 0.0}
    seq, det, pred, spec = make(face, frames=80, noise_sigma=0.5, flag_script=drops)
    tracker = FaceTracker(det, pred, PipelineConfig(spec))
    for f in seq:
        assert tracker(f.index, f.timestamp) is not None
    assert det.calls == 1 + len(drops)


class FixedPredictor:
    def __init__(self, points):
        self.points = points

    def predict(self, frame, rect, input_size):
        return self.points, 1.0


def test_identity_predictor_matches_hand_transform(face, rng):
    mesh, spec = face
    seq, det, _, _ = make(face, frames=3)
    size = 256
    crop = rng.uniform(0, size, (468, 3))
    config = PipelineConfig(spec, input_size=size, filter_params=PASS_THROUGH)
    state = TrackingState.initial(config.filter_params)
    res = step(state, 0, 0.0, det, FixedPredictor(crop), config)
    d = det.detect(0)[0]
    (lx, ly), (rx, ry) = d.landmarks["left_eye"], d.landmarks["right_eye"]
    theta = math.atan2(ry - ly, rx - lx)
    side = max(d.box.width, d.box.height) * 1.5
    c, s = math.cos(theta), math.sin(theta)
    u = (crop[:, 0] - size / 2) * side / size
    v = (crop[:, 1] - size / 2) * side / size
    x = d.box.center[0] + c * u - s * v
    y = d.box.center[1] + s * u + c * v
    assert np.abs(res.raw_mesh.vertices[:, 0] - x).max() <= 1e-6
    assert np.abs(res.raw_mesh.vertices[:, 1] - y).max() <= 1e-6
    # First frame of a fresh filter passes through.
    np.testing.assert_array_equal(res.prediction.mesh.vertices, res.raw_mesh.vertices)


def test_end_to_end_identity(face):
    motion = MotionScript.wobble(120, amplitude=40.0, rotation=0.4, scale=0.2)
    seq, det, pred, spec = make(face, motion=motion)
    tracker = FaceTracker(det, pred, PipelineConfig(spec, filter_params=PASS_THROUGH))
    for f in seq:
        out = tracker(f.index, f.timestamp)
        assert np.abs(out.mesh.vertices - f.ground_truth.vertices).max() <= 1e-6


def test_large_beta_tracks_monotone_motion(face):
    motion = MotionScript.linear(60, translation_step=(2.0, 1.0, 0.0), rotation_step=0.01, scale_step=0.002)
    seq, det, pred, spec = make(face, motion=motion)
    tracker = FaceTracker(det, pred, PipelineConfig(spec, filter_params=FilterParams(beta=1e12)))
    for f in seq:
        out = tracker(f.index, f.timestamp)
        assert np.abs(out.mesh.vertices - f.ground_truth.vertices).max() <= 1e-6


def test_next_rect_comes_from_unfiltered_mesh(face):
    from facemesh.crop import rect_from_mesh

    seq, det, pred, spec = make(face, frames=10, noise_sigma=3.0, seed=9)
    config = PipelineConfig(spec, filter_params=FilterParams(beta=0.0))
    state = TrackingState.initial(config.filter_params)
    for f in seq:
        res = step(state, f.index, f.timestamp, det, pred, config)
    assert state.rect == rect_from_mesh(res.raw_mesh, spec, config.margin)
    assert not np.array_equal(res.raw_mesh.vertices, res.prediction.mesh.vertices)


def _det(w, h):
    return Detection(RotatedRect((0, 0), w, h), {"left_eye": (0, 0), "right_eye": (1, 0)})


def test_select_detection():
    a, b, c = _det(10, 10), _det(20, 5), _det(5, 20)
    assert select_detection([]) is None
    assert select_detection([a, b, c]) is a
    big = _det(30, 30)
    assert select_detection([a, big, b]) is big


def test_config_validation(face):
    _, spec = face
    with pytest.raises(ValueError):
        PipelineConfig(spec, face_flag_threshold=1.0)
    with pytest.raises(ValueError):
        PipelineConfig(spec, input_size=0)
