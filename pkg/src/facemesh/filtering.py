"""Scale-adjusted adaptive low-pass filter for landmark coordinates.

A member of the 1 Euro family: each scalar coordinate is smoothed by a
first-order low-pass whose cutoff grows with the coordinate's speed. Speed is
the endpoint slope over a short rolling window of timestamped raw samples,
divided by the face size so that the same head motion filters identically
at any distance from the camera.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import InvariantError, TimestampError


@dataclass(frozen=True)
class FilterParams:
    min_cutoff_hz: float = 1.0
    beta: float = 40.0
    window_size: int = 5

    def __post_init__(self):
        if not self.min_cutoff_hz > 0:
            raise InvariantError("min_cutoff_hz must be > 0")
        if not self.beta >= 0:
            raise InvariantError("beta must be >= 0")
        if int(self.window_size) != self.window_size or self.window_size < 2:
            raise InvariantError("window_size must be an integer >= 2")

    @classmethod
    def pass_through(cls) -> "FilterParams":
        """Cutoff so high that output equals input to ~1e-11 relative at video rates.

        A large ``beta`` alone is not enough: at a velocity reversal the
        windowed slope is near zero and the cutoff drops to ``min_cutoff_hz``.
        """
        return cls(min_cutoff_hz=1e12, beta=0.0)


class FilterBank:
    """Rolling sample windows and last outputs for every landmark coordinate.

    All coordinates of a frame share one timestamp, so a single time window
    serves the whole (N, 3) block.
    """

    def __init__(self, params: FilterParams | None = None):
        self.params = params or FilterParams()
        self._times: deque = deque(maxlen=self.params.window_size)
        self._values: deque = deque(maxlen=self.params.window_size)
        self._last = None

    @property
    def is_empty(self) -> bool:
        return self._last is None

    def __len__(self):
        return len(self._times)

    @property
    def last_timestamp(self):
        return self._times[-1] if self._times else None

    @property
    def last_output(self):
        return None if self._last is None else self._last.copy()

    def reset(self) -> "FilterBank":
        self._times.clear()
        self._values.clear()
        self._last = None
        return self

    def __call__(self, values, timestamp: float, face_scale: float) -> np.ndarray:
        x = np.array(values, dtype=np.float64)
        t = float(timestamp)
        if not face_scale > 0:
            raise InvariantError(f"face_scale must be positive, got {face_scale}")
        if self._times and not t > self._times[-1]:
            raise TimestampError(f"timestamp {t} does not follow {self._times[-1]}")
        if self._last is not None and x.shape != self._last.shape:
            raise InvariantError(f"expected values of shape {self._last.shape}, got {x.shape}")

        t_prev = self._times[-1] if self._times else None
        self._times.append(t)
        self._values.append(x)
        if t_prev is None:
            self._last = x.copy()
            return x.copy()

        p = self.params
        speed = np.abs(x - self._values[0]) / (t - self._times[0])
        cutoff = p.min_cutoff_hz + p.beta * (speed / face_scale)
        tau = 1.0 / (2.0 * math.pi * cutoff)
        alpha = 1.0 / (1.0 + tau / (t - t_prev))
        y = alpha * x + (1.0 - alpha) * self._last
        self._last = y
        return y.copy()

    filter_frame = __call__


def filter_frame(bank: FilterBank, values, timestamp: float, face_scale: float) -> np.ndarray:
    return bank(values, timestamp, face_scale)


def reset(bank: FilterBank) -> FilterBank:
    return bank.reset()


def smoothing_factor(cutoff_hz: float, dt: float) -> float:
    """Low-pass weight of the newest sample for a given cutoff and sample spacing."""
    tau = 1.0 / (2.0 * math.pi * cutoff_hz)
    return 1.0 / (1.0 + tau / dt)
