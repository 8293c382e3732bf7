"""IOD-normalized error and annotator agreement."""
import numpy as np

from facemesh import EyeCornerSpec, generate_canonical_mesh, inter_annotator_mad, iod_3d, iod_mad_2d
from facemesh.metrics import format_percent

# %% Four eye corners define two eye centres; their 3D distance normalizes errors.
gt = np.zeros((6, 3))
gt[:4] = [[-1, 0, 0], [1, 0, 0], [99, 0, 0], [101, 0, 0]]
gt[4:] = [[50, 40, 10], [50, -30, 5]]
spec = EyeCornerSpec(0, 1, 2, 3)
print("IOD", iod_3d(gt, spec))
print(format_percent(iod_mad_2d(gt + [1, 0, 0], gt, spec)))  # 1 px at IOD 100
print(format_percent(iod_mad_2d(gt + [0, 0, 7], gt, spec)))  # depth errors do not count

# %% Five simulated annotators labelling the same face.
mesh, eyes = generate_canonical_mesh()
rng = np.random.default_rng(1)
annotators = [mesh.vertices + rng.normal(0, 1.5, mesh.vertices.shape) for _ in range(5)]
print("inter-annotator", format_percent(inter_annotator_mad(annotators, eyes)))
print("IOD of the face patch", round(iod_3d(mesh, eyes), 2))
