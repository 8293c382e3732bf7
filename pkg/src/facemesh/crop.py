"""Rotated crop rectangles and the crop <-> image coordinate mapping."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvariantError
from .mesh import SurfaceMesh

_SIMILARITY_TOL = 1e-9


def wrap_angle(theta: float) -> float:
    """Wrap an angle into (-pi, pi]."""
    t = math.remainder(theta, 2.0 * math.pi)
    return math.pi if t == -math.pi else t


@dataclass(frozen=True)
class RotatedRect:
    center: tuple[float, float]
    width: float
    height: float
    rotation: float = 0.0

    def __post_init__(self):
        if not (self.width > 0 and self.height > 0):
            raise InvariantError(f"rect size must be positive, got {self.width}x{self.height}")
        cx, cy = self.center
        object.__setattr__(self, "center", (float(cx), float(cy)))
        object.__setattr__(self, "width", float(self.width))
        object.__setattr__(self, "height", float(self.height))
        object.__setattr__(self, "rotation", wrap_angle(float(self.rotation)))

    @property
    def area(self) -> float:
        return self.width * self.height

    def corners(self) -> np.ndarray:
        """Corners in the order top-left, top-right, bottom-right, bottom-left of the crop."""
        c, s = math.cos(self.rotation), math.sin(self.rotation)
        hw, hh = 0.5 * self.width, 0.5 * self.height
        local = np.array([[-hw, -hh], [hw, -hh], [hw, hh], [-hw, hh]])
        return local @ np.array([[c, s], [-s, c]]) + np.array(self.center)


class Transform2D:
    """Affine map (u, v) -> (x, y) stored as a 2x3 matrix.

    Applied to (N, 3) arrays, the third column is multiplied by the isotropic
    scale when the linear part is a similarity and passed through otherwise.
    """

    __slots__ = ("matrix",)

    def __init__(self, matrix):
        m = np.array(matrix, dtype=np.float64).reshape(2, 3)
        if abs(np.linalg.det(m[:, :2])) <= 1e-12:
            raise InvariantError("transform linear part is singular")
        m.setflags(write=False)
        self.matrix = m

    @classmethod
    def identity(cls) -> "Transform2D":
        return cls([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])

    @property
    def linear(self) -> np.ndarray:
        return self.matrix[:, :2]

    @property
    def offset(self) -> np.ndarray:
        return self.matrix[:, 2]

    def similarity_scale(self):
        """Uniform scale factor if the linear part is a similarity, else ``None``."""
        a = self.linear
        (p, q), (r, s) = a
        scale = math.sqrt(abs(p * s - q * r))
        gram = a.T @ a
        if np.abs(gram - scale * scale * np.eye(2)).max() <= _SIMILARITY_TOL * scale * scale:
            return scale
        return None

    def apply(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=np.float64)
        out = pts[..., :2] @ self.linear.T + self.offset
        if pts.shape[-1] == 2:
            return out
        z = pts[..., 2:]
        scale = self.similarity_scale()
        if scale is not None:
            z = z * scale
        return np.concatenate([out, z], axis=-1)

    def invert(self) -> "Transform2D":
        inv = np.linalg.inv(self.linear)
        return Transform2D(np.hstack([inv, -(inv @ self.offset)[:, None]]))

    def compose(self, other: "Transform2D") -> "Transform2D":
        """``self`` after ``other``."""
        lin = self.linear @ other.linear
        return Transform2D(np.hstack([lin, (self.linear @ other.offset + self.offset)[:, None]]))

    def __call__(self, points) -> np.ndarray:
        return self.apply(points)

    def __repr__(self):
        return f"Transform2D({self.matrix.tolist()})"


def apply(transform: Transform2D, points) -> np.ndarray:
    return transform.apply(points)


def invert(transform: Transform2D) -> Transform2D:
    return transform.invert()


def alignment_rotation(eye_left, eye_right) -> float:
    """Angle of the eye line; rotating the image by its negative levels the eyes."""
    dx = float(eye_right[0]) - float(eye_left[0])
    dy = float(eye_right[1]) - float(eye_left[1])
    if math.hypot(dx, dy) <= 1e-9:
        raise InvariantError("eye points coincide")
    return math.atan2(dy, dx)


def crop_transform(rect: RotatedRect, input_size: float) -> Transform2D:
    """Map crop pixel coordinates in [0, input_size]^2 onto the image."""
    if not input_size > 0:
        raise InvariantError("input_size must be positive")
    c, s = math.cos(rect.rotation), math.sin(rect.rotation)
    sx = rect.width / input_size
    sy = rect.height / input_size
    lin = np.array([[c * sx, -s * sy], [s * sx, c * sy]])
    half = 0.5 * input_size
    offset = np.array(rect.center) - lin @ np.array([half, half])
    return Transform2D(np.hstack([lin, offset[:, None]]))


def normalize_z(mesh: SurfaceMesh, z_aspect: float = 0.5) -> SurfaceMesh:
    """Center z on the mesh's center of mass and tie its span to the x span."""
    v = np.array(mesh.vertices)
    x_span = np.ptp(v[:, 0])
    if not x_span > 0:
        raise InvariantError("cannot normalize depth: x-span is zero")
    z = v[:, 2] - v[:, 2].mean()
    z_span = np.ptp(z)
    v[:, 2] = z * (z_aspect * x_span / z_span) if z_span > 0 else 0.0
    return mesh.with_vertices(v)


def rect_from_mesh(mesh: SurfaceMesh, eye_spec, margin: float = 0.25) -> RotatedRect:
    """Square crop around a predicted mesh, rotated to level the eyes.

    The xy bounding box is taken in the eye-aligned frame, grown by ``margin``
    of its size on each side, then squared to its longer side.
    """
    from .metrics import eye_centers

    left, right = eye_centers(mesh, eye_spec)
    theta = alignment_rotation(left, right)
    c, s = math.cos(theta), math.sin(theta)
    xy = mesh.vertices[:, :2]
    # Coordinates along the rect axes (rotation by -theta).
    u = xy[:, 0] * c + xy[:, 1] * s
    w = -xy[:, 0] * s + xy[:, 1] * c
    u0, u1 = u.min(), u.max()
    w0, w1 = w.min(), w.max()
    if not (u1 > u0 and w1 > w0):
        raise InvariantError("mesh xy bounding box is degenerate")
    side = max(u1 - u0, w1 - w0) * (1.0 + 2.0 * margin)
    cu, cw = 0.5 * (u0 + u1), 0.5 * (w0 + w1)
    center = (cu * c - cw * s, cu * s + cw * c)
    return RotatedRect(center, side, side, theta)


def rect_from_box(box: RotatedRect, eye_left, eye_right, margin: float = 0.25) -> RotatedRect:
    """Detector box -> square crop rotated by the eye-line angle."""
    side = max(box.width, box.height) * (1.0 + 2.0 * margin)
    return RotatedRect(box.center, side, side, alignment_rotation(eye_left, eye_right))
