"""Editing a mesh with geodesic brush strokes."""
import numpy as np

from facemesh import BrushStroke, apply_brush, apply_strokes, generate_canonical_mesh, geodesic_distances

mesh, eyes = generate_canonical_mesh()
pivot = eyes.left_outer

# %% Weight falls off as exp(-d / radius) along mesh edges, zero past 4 radii.
d = geodesic_distances(mesh, pivot)
stroke = BrushStroke(pivot, displacement=(3.0, -2.0), radius=10.0)
out = apply_brush(mesh, stroke)
moved = np.linalg.norm(out.vertices[:, :2] - mesh.vertices[:, :2], axis=1)
print("pivot moved by", out.vertices[pivot, :2] - mesh.vertices[pivot, :2])
print("vertices touched:", int((moved > 0).sum()), "of", mesh.num_vertices)
print("depth unchanged:", np.array_equal(out.vertices[:, 2], mesh.vertices[:, 2]))
for r in (0, 10, 20, 40):
    near = np.abs(d - r) < 2
    if near.any():
        print(f"  d ~ {r:2d}: shift {moved[near].mean():.3f}")

# %% Several strokes: distances on the evolving mesh, or frozen on the original.
strokes = [BrushStroke(pivot, (4.0, 0.0), 15.0), BrushStroke(pivot, (4.0, 0.0), 15.0)]
live = apply_strokes(mesh, strokes)
frozen = apply_strokes(mesh, strokes, frozen_geodesics=True)
print("max difference live vs frozen:", np.abs(live.vertices - frozen.vertices).max())
