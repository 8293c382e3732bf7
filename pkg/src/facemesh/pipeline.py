"""Per-stream face tracking state machine.

The detector runs only when there is no usable crop: on the first frame and
whenever the face flag of a prediction drops below threshold. Otherwise the
crop for the next frame is derived from the current prediction.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping, Optional, Protocol, Sequence

import numpy as np

from .crop import RotatedRect, crop_transform, normalize_z, rect_from_box, rect_from_mesh
from .errors import InvariantError, TimestampError
from .filtering import FilterBank, FilterParams
from .mesh import MeshTopology, SurfaceMesh
from .metrics import EyeCornerSpec, iod_3d


@dataclass(frozen=True)
class Detection:
    """Axis-aligned face box (``box.rotation == 0``) plus named keypoints."""

    box: RotatedRect
    landmarks: Mapping[str, tuple[float, float]]

    def __post_init__(self):
        if not self.box.area > 0:
            raise InvariantError("detection box has zero area")
        missing = {"left_eye", "right_eye"} - set(self.landmarks)
        if missing:
            raise InvariantError(f"detection lacks {sorted(missing)}")


@dataclass(frozen=True)
class FacePrediction:
    mesh: SurfaceMesh
    face_flag: float

    def __post_init__(self):
        if not 0.0 <= self.face_flag <= 1.0:
            raise InvariantError(f"face_flag must be in [0, 1], got {self.face_flag}")


class FaceDetector(Protocol):
    def detect(self, frame: Any) -> Sequence[Detection]: ...


class LandmarkPredictor(Protocol):
    def predict(self, frame: Any, rect: RotatedRect, input_size: int) -> tuple[np.ndarray, float]:
        """Return (N, 3) landmarks in crop coordinates and the face flag."""
        ...


@dataclass(frozen=True)
class PipelineConfig:
    eye_spec: EyeCornerSpec
    face_flag_threshold: float = 0.5
    margin: float = 0.25
    input_size: int = 256
    z_aspect: float = 0.5
    filter_params: FilterParams = field(default_factory=FilterParams)
    topology: Optional[MeshTopology] = None

    def __post_init__(self):
        if not 0.0 < self.face_flag_threshold < 1.0:
            raise InvariantError("face_flag_threshold must lie in (0, 1)")
        if not self.input_size > 0:
            raise InvariantError("input_size must be positive")
        if self.margin < 0:
            raise InvariantError("margin must be >= 0")


@dataclass
class TrackingState:
    """``rect is None`` means the next frame needs the detector."""

    filter: FilterBank
    rect: Optional[RotatedRect] = None
    last_timestamp: Optional[float] = None

    @classmethod
    def initial(cls, params: FilterParams | None = None) -> "TrackingState":
        return cls(FilterBank(params))

    @property
    def tracking(self) -> bool:
        return self.rect is not None


@dataclass
class FrameResult:
    prediction: Optional[FacePrediction]
    detector_calls: int = 0
    reacquired: bool = False
    raw_mesh: Optional[SurfaceMesh] = None


def select_detection(detections: Sequence[Detection]) -> Optional[Detection]:
    """Largest box wins; ties go to the earliest detection."""
    best = None
    for d in detections:
        if best is None or d.box.area > best.box.area:
            best = d
    return best


def _detect_rect(frame, detector: FaceDetector, config: PipelineConfig) -> Optional[RotatedRect]:
    det = select_detection(detector.detect(frame))
    if det is None:
        return None
    return rect_from_box(det.box, det.landmarks["left_eye"], det.landmarks["right_eye"], config.margin)


def _predict(frame, rect, predictor: LandmarkPredictor, config: PipelineConfig):
    crop_pts, flag = predictor.predict(frame, rect, config.input_size)
    pts = crop_transform(rect, config.input_size).apply(np.asarray(crop_pts, dtype=np.float64))
    mesh = normalize_z(SurfaceMesh(pts, config.topology), config.z_aspect)
    return mesh, float(flag)


def step(
    state: TrackingState,
    frame,
    timestamp: float,
    detector: FaceDetector,
    predictor: LandmarkPredictor,
    config: PipelineConfig,
) -> FrameResult:
    """Advance ``state`` by one frame in place and report what happened."""
    if state.last_timestamp is not None and not timestamp > state.last_timestamp:
        raise TimestampError(f"timestamp {timestamp} does not follow {state.last_timestamp}")
    state.last_timestamp = float(timestamp)
    result = FrameResult(None)
    threshold = config.face_flag_threshold

    rect = state.rect
    from_detector = rect is None
    if from_detector:
        result.detector_calls += 1
        rect = _detect_rect(frame, detector, config)
        if rect is None:
            return result

    mesh, flag = _predict(frame, rect, predictor, config)
    if flag < threshold and not from_detector:
        # Re-acquisition: one detector pass and one retry within this frame.
        result.detector_calls += 1
        result.reacquired = True
        rect = _detect_rect(frame, detector, config)
        if rect is not None:
            mesh, flag = _predict(frame, rect, predictor, config)
    if rect is None or flag < threshold:
        state.rect = None
        state.filter.reset()
        return result
    if result.reacquired:
        state.filter.reset()

    scale = iod_3d(mesh, config.eye_spec)
    filtered = state.filter(mesh.vertices, timestamp, scale)
    state.rect = rect_from_mesh(mesh, config.eye_spec, config.margin)
    result.raw_mesh = mesh
    result.prediction = FacePrediction(mesh.with_vertices(filtered), flag)
    return result


def process_frame(state, frame, timestamp, detector, predictor, config):
    """Functional form of :func:`step`: returns ``(state, prediction or None)``."""
    result = step(state, frame, timestamp, detector, predictor, config)
    return state, result.prediction


class FaceTracker:
    """Convenience wrapper owning the state of one video stream."""

    def __init__(self, detector: FaceDetector, predictor: LandmarkPredictor, config: PipelineConfig):
        self.detector = detector
        self.predictor = predictor
        self.config = config
        self.state = TrackingState.initial(config.filter_params)
        self.detector_calls = 0
        self.reacquisition_frames: list = []
        self.frames = 0

    def __call__(self, frame, timestamp: float) -> Optional[FacePrediction]:
        result = step(self.state, frame, timestamp, self.detector, self.predictor, self.config)
        self.detector_calls += result.detector_calls
        if result.reacquired:
            self.reacquisition_frames.append(frame)
        self.frames += 1
        return result.prediction

    def reset(self):
        self.state = TrackingState.initial(self.config.filter_params)
