"""Catmull-Clark refinement of a quad mesh, step by step."""
import numpy as np

from facemesh.mesh import catmull_clark_subdivide, cube_mesh, grid_mesh

# %% A cube with corners at +-1: 8 vertices, 6 quads.
cube = cube_mesh()
print(cube.num_vertices, cube.topology.num_quads)

# One level: every quad splits in four, new points for each edge and face.
once = catmull_clark_subdivide(cube)
print(once.num_vertices, once.topology.num_quads)  # 26 24
print(once.vertices[7])  # corner pulled in to 5/9 on each axis

# %% Repeated refinement converges towards a rounded blob.
for level in range(4):
    m = catmull_clark_subdivide(cube, level)
    r = np.linalg.norm(m.vertices, axis=1)
    print(f"level {level}: {m.topology.num_quads:5d} quads, radius {r.min():.3f}..{r.max():.3f}")

# %% Open meshes keep their rim: boundary edges use midpoints.
sheet = grid_mesh(4, 3)
fine = catmull_clark_subdivide(sheet, 2)
print(fine.topology.num_quads, fine.topology.euler_characteristic())  # 96 1
print(fine.vertices[:, :2].min(axis=0), fine.vertices[:, :2].max(axis=0))
