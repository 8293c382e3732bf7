"""Batch annotation brush: drag a region of vertices with geodesic falloff."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .errors import InvariantError, ParseError
from .mesh import SurfaceMesh, geodesic_distances

# Vertices farther than this many radii stay put.
CUTOFF_RADII = 4.0


@dataclass(frozen=True)
class BrushStroke:
    pivot: int
    displacement: tuple[float, float]
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise InvariantError(f"brush radius must be positive, got {self.radius}")
        if self.pivot < 0:
            raise InvariantError(f"pivot must be a vertex index, got {self.pivot}")


def brush_weights(distances: np.ndarray, radius: float) -> np.ndarray:
    d = np.asarray(distances, dtype=np.float64)
    return np.where(d <= CUTOFF_RADII * radius, np.exp(-d / radius), 0.0)


def apply_brush(
    mesh: SurfaceMesh, stroke: BrushStroke, distances: Optional[np.ndarray] = None
) -> SurfaceMesh:
    """Move x, y by ``exp(-d / radius) * displacement``; z is left untouched.

    ``d`` is the edge-path distance from the pivot on the mesh as it is when the
    stroke starts. Pass precomputed ``distances`` to reuse a frozen geodesic field.
    """
    if distances is None:
        distances = geodesic_distances(mesh, stroke.pivot)
    elif not 0 <= stroke.pivot < mesh.num_vertices:
        raise IndexError(f"pivot {stroke.pivot} out of range")
    w = brush_weights(distances, stroke.radius)
    v = np.array(mesh.vertices)
    v[:, 0] += w * stroke.displacement[0]
    v[:, 1] += w * stroke.displacement[1]
    return mesh.with_vertices(v)


def apply_strokes(
    mesh: SurfaceMesh, strokes: Iterable[BrushStroke], frozen_geodesics: bool = False
) -> SurfaceMesh:
    """Apply strokes in order.

    By default every stroke measures geodesics on the current surface. With
    ``frozen_geodesics`` the distances are taken once per pivot on the input mesh.
    """
    base = mesh
    cache: dict[int, np.ndarray] = {}
    for s in strokes:
        d = None
        if frozen_geodesics:
            if s.pivot not in cache:
                cache[s.pivot] = geodesic_distances(base, s.pivot)
            d = cache[s.pivot]
        mesh = apply_brush(mesh, s, d)
    return mesh


def load_strokes(text: str) -> list[BrushStroke]:
    """Parse one ``pivot dx dy radius`` stroke per line."""
    strokes = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 4:
            raise ParseError(f"line {lineno}: expected 'pivot dx dy radius'")
        try:
            pivot = int(parts[0])
            dx, dy, radius = (float(p) for p in parts[1:])
        except ValueError as exc:
            raise ParseError(f"line {lineno}: {exc}") from None
        strokes.append(BrushStroke(pivot, (dx, dy), radius))
    return strokes
