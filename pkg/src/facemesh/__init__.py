"""Non-neural machinery for real-time face mesh tracking.

Crop geometry, a detector/predictor tracking loop with face-flag
re-acquisition, scale-adjusted temporal filtering, quad-mesh subdivision,
a geodesic annotation brush and IOD-normalized evaluation.
"""
from .brush import BrushStroke, apply_brush, apply_strokes, load_strokes
from .crop import (RotatedRect, Transform2D, alignment_rotation, crop_transform, normalize_z,
                   rect_from_mesh)
from .errors import FaceMeshError, InvariantError, ParseError, TimestampError, TopologyError
from .filtering import FilterBank, FilterParams, filter_frame
from .harness import (HarnessConfig, MotionScript, generate_canonical_mesh, generate_sequence,
                      mock_detector, mock_predictor)
from .mesh import (EdgeGraph, MeshTopology, SurfaceMesh, build_edge_graph, catmull_clark_subdivide,
                   geodesic_distances, load_topology)
from .metrics import EyeCornerSpec, eye_centers, inter_annotator_mad, iod_3d, iod_mad_2d, jitter_rms
from .pipeline import (Detection, FacePrediction, FaceTracker, PipelineConfig, TrackingState,
                       process_frame)

__version__ = "0.1.0"
