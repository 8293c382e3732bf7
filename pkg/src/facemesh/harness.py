"""Deterministic synthetic face sequences and stand-in detector/predictor models.

Noise comes from ``numpy.random.default_rng(seed)`` (PCG64). For every frame,
in order, one ``standard_normal((N, 3))`` block is drawn and multiplied by
``noise_sigma``; the stream does not depend on ``noise_sigma`` itself.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence, Union

import numpy as np

from .crop import RotatedRect, crop_transform, normalize_z
from .errors import InvariantError
from .io import read_obj
from .mesh import SurfaceMesh, grid_mesh, grid_topology
from .metrics import EyeCornerSpec, eye_centers
from .pipeline import Detection

FlagValue = Union[float, Sequence[float]]

# 26 x 18 = 468 vertices, matching the production landmark count.
DEFAULT_PATCH = (26, 18)


@dataclass(frozen=True)
class MotionScript:
    """Per-frame rigid pose, applied about the canonical mesh centroid."""

    translations: np.ndarray
    rotations: np.ndarray
    scales: np.ndarray
    fps: float = 30.0

    def __post_init__(self):
        t = np.asarray(self.translations, dtype=np.float64).reshape(-1, 3)
        r = np.asarray(self.rotations, dtype=np.float64).ravel()
        s = np.asarray(self.scales, dtype=np.float64).ravel()
        if not (len(t) == len(r) == len(s)):
            raise InvariantError("motion script arrays differ in length")
        if (s <= 0).any():
            raise InvariantError("scales must be positive")
        if not self.fps > 0:
            raise InvariantError("fps must be positive")
        for name, a in (("translations", t), ("rotations", r), ("scales", s)):
            object.__setattr__(self, name, a)

    @property
    def num_frames(self) -> int:
        return len(self.scales)

    @property
    def timestamps(self) -> np.ndarray:
        return np.arange(self.num_frames) / self.fps

    @classmethod
    def static(cls, frames: int, fps: float = 30.0) -> "MotionScript":
        return cls(np.zeros((frames, 3)), np.zeros(frames), np.ones(frames), fps)

    @classmethod
    def linear(cls, frames, fps=30.0, translation_step=(0.0, 0.0, 0.0), rotation_step=0.0,
               scale_step=0.0) -> "MotionScript":
        k = np.arange(frames, dtype=np.float64)
        return cls(
            k[:, None] * np.asarray(translation_step, dtype=np.float64),
            k * rotation_step,
            (1.0 + scale_step) ** k,
            fps,
        )

    @classmethod
    def wobble(cls, frames, fps=30.0, amplitude=20.0, rotation=0.2, scale=0.1,
               period_s=4.0) -> "MotionScript":
        """Smooth head sway: circular drift, in-plane roll and zoom."""
        w = 2.0 * math.pi * np.arange(frames) / (fps * period_s)
        trans = np.stack([amplitude * np.sin(w), 0.5 * amplitude * np.sin(2 * w), np.zeros(frames)], axis=1)
        return cls(trans, rotation * np.sin(0.5 * w), 1.0 + scale * np.sin(w), fps)


@dataclass(frozen=True)
class HarnessConfig:
    noise_sigma: float = 0.0
    flag_script: Mapping[int, FlagValue] = field(default_factory=dict)
    seed: int = 0
    # Ground truth is expressed in the pipeline's depth convention; None keeps raw z.
    z_aspect: Optional[float] = 0.5

    def __post_init__(self):
        if self.noise_sigma < 0:
            raise InvariantError("noise_sigma must be >= 0")


@dataclass(frozen=True)
class SequenceFrame:
    index: int
    timestamp: float
    ground_truth: SurfaceMesh
    noisy: SurfaceMesh


def _grid_eye_spec(nx: int, ny: int) -> EyeCornerSpec:
    if nx < 4:
        return EyeCornerSpec(0, nx, 2 * nx - 1, nx - 1)
    row = (ny - 1) * 35 // 100
    lo = (nx - 1) * 15 // 100
    li = max(lo + 1, (nx - 1) * 40 // 100)
    base = row * nx
    return EyeCornerSpec(base + lo, base + li, base + nx - 1 - li, base + nx - 1 - lo)


def ellipsoid_patch(nu: int = DEFAULT_PATCH[0], nv: int = DEFAULT_PATCH[1], width: float = 200.0,
                    center=(320.0, 240.0)) -> SurfaceMesh:
    """Front part of an ellipsoid sampled on a ``nu`` x ``nv`` grid, face-like proportions."""
    u = np.linspace(-0.45 * math.pi, 0.45 * math.pi, nu)
    v = np.linspace(-0.4 * math.pi, 0.4 * math.pi, nv)
    uu, vv = np.meshgrid(u, v)
    a = 0.5 * width
    x = a * np.sin(uu) * np.cos(vv) + center[0]
    y = 1.3 * a * np.sin(vv) + center[1]
    z = -a * np.cos(uu) * np.cos(vv)
    return SurfaceMesh(np.stack([x.ravel(), y.ravel(), z.ravel()], axis=1), grid_topology(nu, nv))


def generate_canonical_mesh(kind: str = "ellipsoid", *, shape=None, spacing: float = 10.0,
                            width: float = 200.0, center=(320.0, 240.0), path=None,
                            eye_spec: Optional[EyeCornerSpec] = None, z_aspect: Optional[float] = 0.5):
    """Build a canonical face stand-in and its eye-corner spec.

    ``kind`` is ``"grid"``, ``"ellipsoid"`` or ``"file"`` (an OBJ with quads, which
    needs an explicit ``eye_spec``).
    """
    if kind == "grid":
        nx, ny = shape or (3, 3)
        mesh = grid_mesh(nx, ny, spacing)
        spec = eye_spec or _grid_eye_spec(nx, ny)
    elif kind == "ellipsoid":
        nu, nv = shape or DEFAULT_PATCH
        mesh = ellipsoid_patch(nu, nv, width, center)
        spec = eye_spec or _grid_eye_spec(nu, nv)
    elif kind == "file":
        if path is None or eye_spec is None:
            raise ValueError("kind='file' needs both path and eye_spec")
        mesh = read_obj(path)
        mesh.require_topology()
        spec = eye_spec
    else:
        raise ValueError(f"unknown canonical mesh kind {kind!r}")
    spec.check(mesh.num_vertices)
    if z_aspect is not None and np.ptp(mesh.vertices[:, 2]) > 0:
        mesh = normalize_z(mesh, z_aspect)
    return mesh, spec


def default_eye_spec() -> EyeCornerSpec:
    return _grid_eye_spec(*DEFAULT_PATCH)


def apply_pose(mesh: SurfaceMesh, translation, rotation: float, scale: float, pivot=None) -> SurfaceMesh:
    v = mesh.vertices
    c = v.mean(axis=0) if pivot is None else np.asarray(pivot, dtype=np.float64)
    cs, sn = math.cos(rotation), math.sin(rotation)
    d = v - c
    out = np.empty_like(v)
    out[:, 0] = scale * (cs * d[:, 0] - sn * d[:, 1])
    out[:, 1] = scale * (sn * d[:, 0] + cs * d[:, 1])
    out[:, 2] = scale * d[:, 2]
    return mesh.with_vertices(out + c + np.asarray(translation, dtype=np.float64))


def generate_sequence(mesh: SurfaceMesh, script: MotionScript,
                      config: HarnessConfig = HarnessConfig()) -> list[SequenceFrame]:
    rng = np.random.default_rng(config.seed)
    pivot = mesh.vertices.mean(axis=0)
    frames = []
    for k, t in enumerate(script.timestamps):
        gt = apply_pose(mesh, script.translations[k], script.rotations[k], script.scales[k], pivot)
        if config.z_aspect is not None and np.ptp(gt.vertices[:, 2]) > 0:
            gt = normalize_z(gt, config.z_aspect)
        noise = rng.standard_normal((mesh.num_vertices, 3)) * config.noise_sigma
        frames.append(SequenceFrame(k, float(t), gt, gt.with_vertices(gt.vertices + noise)))
    return frames


def _flag_in_rect(point, rect: RotatedRect) -> float:
    """1 inside the rect, decaying linearly to 0 one rect side away from it."""
    cs, sn = math.cos(rect.rotation), math.sin(rect.rotation)
    dx, dy = point[0] - rect.center[0], point[1] - rect.center[1]
    u = cs * dx + sn * dy
    w = -sn * dx + cs * dy
    ou = max(abs(u) - 0.5 * rect.width, 0.0)
    ow = max(abs(w) - 0.5 * rect.height, 0.0)
    return max(0.0, 1.0 - math.hypot(ou, ow) / max(rect.width, rect.height))


class MockPredictor:
    """Replays known landmarks as if a network had predicted them from a crop.

    Scripted flags override the geometric rule: a scalar applies to the first
    query of that frame, a sequence to successive queries.
    """

    def __init__(self, landmarks: Sequence[np.ndarray], reference: Sequence[np.ndarray],
                 eye_spec: EyeCornerSpec, flag_script: Mapping[int, FlagValue] | None = None):
        self.landmarks = [np.asarray(a, dtype=np.float64) for a in landmarks]
        self._eye_mid = [0.5 * (l + r)[:2] for l, r in (eye_centers(np.asarray(a), eye_spec) for a in reference)]
        self.flag_script = dict(flag_script or {})
        self.calls: dict[int, int] = {}

    def __len__(self):
        return len(self.landmarks)

    def _index(self, frame) -> int:
        k = int(frame)
        if not 0 <= k < len(self.landmarks):
            raise IndexError(f"frame {k} out of range for {len(self.landmarks)} frames")
        return k

    def face_flag(self, frame, rect: RotatedRect, attempt: int = 0) -> float:
        k = self._index(frame)
        scripted = self.flag_script.get(k)
        if scripted is not None:
            seq = [scripted] if np.isscalar(scripted) else list(scripted)
            if attempt < len(seq):
                return float(seq[attempt])
        return _flag_in_rect(self._eye_mid[k], rect)

    def predict(self, frame, rect: RotatedRect, input_size: int):
        k = self._index(frame)
        attempt = self.calls.get(k, 0)
        self.calls[k] = attempt + 1
        crop = crop_transform(rect, input_size).invert().apply(self.landmarks[k])
        return crop, self.face_flag(k, rect, attempt)


class MockDetector:
    """Returns the true bounding box and eye centers, except on ``fail_frames``."""

    def __init__(self, reference: Sequence[np.ndarray], eye_spec: EyeCornerSpec, fail_frames=()):
        self.reference = [np.asarray(a, dtype=np.float64) for a in reference]
        self.eye_spec = eye_spec
        self.fail_frames = set(fail_frames)
        self.calls = 0
        self.called_at: list[int] = []

    def detect(self, frame) -> list[Detection]:
        k = int(frame)
        if not 0 <= k < len(self.reference):
            raise IndexError(f"frame {k} out of range for {len(self.reference)} frames")
        self.calls += 1
        self.called_at.append(k)
        if k in self.fail_frames:
            return []
        v = self.reference[k]
        lo, hi = v[:, :2].min(axis=0), v[:, :2].max(axis=0)
        box = RotatedRect(tuple(0.5 * (lo + hi)), *(hi - lo))
        left, right = eye_centers(v, self.eye_spec)
        nose = v[np.argmin(v[:, 2]), :2]
        return [Detection(box, {"left_eye": tuple(left[:2]), "right_eye": tuple(right[:2]),
                                "nose_tip": tuple(nose)})]


def mock_predictor(sequence: Sequence[SequenceFrame], config: HarnessConfig,
                   eye_spec: EyeCornerSpec) -> MockPredictor:
    return MockPredictor([f.noisy.vertices for f in sequence], [f.ground_truth.vertices for f in sequence],
                         eye_spec, config.flag_script)


def mock_detector(sequence: Sequence[SequenceFrame], eye_spec: EyeCornerSpec, fail_frames=()) -> MockDetector:
    return MockDetector([f.ground_truth.vertices for f in sequence], eye_spec, fail_frames)
