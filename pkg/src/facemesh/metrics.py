"""Interocular-distance normalized errors and a frame-to-frame jitter measure."""
from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations
from typing import Sequence

import numpy as np

from .errors import InvariantError, TopologyError
from .mesh import SurfaceMesh


@dataclass(frozen=True)
class EyeCornerSpec:
    """Vertex indices of the four eye corners."""

    left_outer: int
    left_inner: int
    right_inner: int
    right_outer: int

    def __post_init__(self):
        idx = self.indices
        if len(set(idx)) != 4:
            raise InvariantError(f"eye corner indices must be distinct, got {idx}")
        if min(idx) < 0:
            raise InvariantError(f"eye corner indices must be non-negative, got {idx}")

    @property
    def indices(self) -> tuple[int, int, int, int]:
        return (self.left_outer, self.left_inner, self.right_inner, self.right_outer)

    def check(self, num_vertices: int):
        if max(self.indices) >= num_vertices:
            raise IndexError(f"eye corner index out of range for {num_vertices} vertices")


def _verts(mesh) -> np.ndarray:
    return mesh.vertices if isinstance(mesh, SurfaceMesh) else np.asarray(mesh, dtype=np.float64)


def eye_centers(mesh, spec: EyeCornerSpec) -> tuple[np.ndarray, np.ndarray]:
    """Midpoints of the outer/inner corner segments, independent of gaze."""
    v = _verts(mesh)
    spec.check(len(v))
    left = 0.5 * (v[spec.left_outer] + v[spec.left_inner])
    right = 0.5 * (v[spec.right_inner] + v[spec.right_outer])
    return left, right


def iod_3d(mesh, spec: EyeCornerSpec) -> float:
    """3D distance between eye centers, insensitive to yaw."""
    left, right = eye_centers(mesh, spec)
    d = float(np.linalg.norm(right - left))
    if d == 0.0:
        raise InvariantError("interocular distance is zero")
    return d


def _check_pair(pred, gt):
    if isinstance(pred, SurfaceMesh) and isinstance(gt, SurfaceMesh):
        if pred.topology is not None and gt.topology is not None and pred.topology != gt.topology:
            raise TopologyError("prediction and ground truth have different topologies")
    a, b = _verts(pred), _verts(gt)
    if a.shape != b.shape:
        raise TopologyError(f"vertex count mismatch: {a.shape[0]} vs {b.shape[0]}")
    return a, b


def iod_mad_2d(pred, gt, spec: EyeCornerSpec) -> float:
    """Mean 2D per-vertex Euclidean error as a percentage of the ground-truth 3D IOD."""
    a, b = _check_pair(pred, gt)
    iod = iod_3d(b, spec)
    err = np.linalg.norm(a[:, :2] - b[:, :2], axis=1).mean()
    return 100.0 * float(err) / iod


def inter_annotator_mad(annotations: Sequence, spec: EyeCornerSpec) -> float:
    """Mean ``iod_mad_2d`` over all ordered annotation pairs (i != j).

    Each pair is normalized by the IOD of its second member.
    """
    if len(annotations) < 2:
        raise InvariantError("need at least two annotations")
    vals = [iod_mad_2d(a, b, spec) for a, b in permutations(annotations, 2)]
    return float(np.mean(vals))


def jitter_rms(sequence: Sequence) -> float:
    """RMS magnitude of frame-to-frame 2D vertex displacement."""
    if len(sequence) < 2:
        raise InvariantError("jitter needs at least two frames")
    xy = np.stack([_verts(m)[:, :2] for m in sequence])
    d = np.diff(xy, axis=0)
    return float(np.sqrt((d**2).sum(axis=-1).mean()))


def format_percent(value: float) -> str:
    return f"{value:.4f}%"
