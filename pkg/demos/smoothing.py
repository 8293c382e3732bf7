"""Jitter versus lag for the adaptive landmark filter."""
import numpy as np

from facemesh import FilterBank, FilterParams, jitter_rms
from facemesh.filtering import smoothing_factor

fps = 30.0
rng = np.random.default_rng(0)
times = np.arange(600) / fps

# %% A still face with 2 px noise. Without the speed term this is a plain low-pass.
still = 300 + rng.normal(0, 2.0, (600, 468, 3))
for beta in (0.0, 10.0, 40.0):
    bank = FilterBank(FilterParams(beta=beta))
    out = [bank(x, t, face_scale=60.0) for x, t in zip(still, times)]
    print(f"beta {beta:5.1f}: jitter {jitter_rms(out) / jitter_rms(still):.3f} of raw")

a = smoothing_factor(1.0, 1 / fps)
print(f"alpha at 1 Hz = {a:.4f}, stationary ratio a/sqrt(2-a) = {a / np.sqrt(2 - a):.3f}")

# %% A head turning at constant speed: higher beta means less lag.
ramp = (200.0 * times)[:, None, None] * np.ones((1, 468, 3))
for beta in (0.0, 10.0, 40.0):
    bank = FilterBank(FilterParams(beta=beta))
    out = np.stack([bank(x, t, face_scale=60.0) for x, t in zip(ramp, times)])
    print(f"beta {beta:5.1f}: lag {ramp[-1, 0, 0] - out[-1, 0, 0]:.2f} px")

# %% Scaling face and noise together leaves the relative smoothing unchanged.
for s in (0.5, 1.0, 4.0):
    bank = FilterBank(FilterParams())
    out = [bank(s * x, t, face_scale=s * 60.0) for x, t in zip(still, times)]
    print(f"scale {s}: ratio {jitter_rms(out) / jitter_rms(s * still):.4f}")
