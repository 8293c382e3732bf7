"""Crop-based tracking on a synthetic stream, with a dropped face in the middle."""
import numpy as np

from facemesh import (FaceTracker, HarnessConfig, MotionScript, PipelineConfig, generate_canonical_mesh,
                      generate_sequence, iod_mad_2d, mock_detector, mock_predictor)

mesh, eyes = generate_canonical_mesh()  # 468-vertex face-like patch
print(mesh.num_vertices, "vertices, eye corners", eyes.indices)

# %% Ten seconds of head sway at 30 FPS, 1 px landmark noise, face lost at frame 120.
cfg = HarnessConfig(noise_sigma=1.0, flag_script={120: 0.0}, seed=0)
seq = generate_sequence(mesh, MotionScript.wobble(300), cfg)
detector = mock_detector(seq, eyes)
tracker = FaceTracker(detector, mock_predictor(seq, cfg, eyes), PipelineConfig(eyes))

errors = []
for f in seq:
    pred = tracker(f.index, f.timestamp)
    errors.append(iod_mad_2d(pred.mesh, f.ground_truth, eyes))

# The detector only runs on the first frame and when the face flag drops.
print("detector ran at frames", detector.called_at)
print("re-acquired at", tracker.reacquisition_frames)
print(f"mean IOD-normalized error {np.mean(errors):.3f}%")

# %% The crop for the next frame comes from the current mesh.
rect = tracker.state.rect
print("next crop centre", np.round(rect.center, 1), "side", round(rect.width, 1),
      "roll", round(np.degrees(rect.rotation), 2), "deg")
