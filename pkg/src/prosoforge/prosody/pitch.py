"""YIN-style fundamental frequency tracking."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from ..errors import ValidationError
from ..signal_core import AudioBuffer, FrameSpec

CMND_THRESHOLD = 0.15
DEFAULT_F0_RANGE = (50.0, 500.0)


@dataclass(frozen=True)
class PitchContour:
    """Per-frame f0 (0 where unvoiced), voicing flags and RMS energy."""

    f0_hz: np.ndarray
    voiced: np.ndarray
    rms: np.ndarray
    hop_s: float
    f0_range: Tuple[float, float] = DEFAULT_F0_RANGE

    def __post_init__(self):
        f0 = np.asarray(self.f0_hz, dtype=np.float64)
        voiced = np.asarray(self.voiced, dtype=bool)
        rms = np.asarray(self.rms, dtype=np.float64)
        if not (f0.shape == voiced.shape == rms.shape) or f0.ndim != 1:
            raise ValidationError("f0, voiced and rms must be 1-D arrays of equal length")
        if np.any(voiced != (f0 > 0)):
            raise ValidationError("voiced flags must agree with f0 > 0")
        for name, arr in (("f0_hz", f0), ("voiced", voiced), ("rms", rms)):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "f0_range", (float(self.f0_range[0]), float(self.f0_range[1])))

    def __len__(self) -> int:
        return self.f0_hz.shape[0]

    @classmethod
    def from_f0(cls, f0_hz, hop_s: float, rms=None, f0_range=DEFAULT_F0_RANGE) -> "PitchContour":
        f0 = np.asarray(f0_hz, dtype=np.float64)
        rms = np.ones_like(f0) if rms is None else rms
        return cls(f0, f0 > 0, rms, hop_s, f0_range)

    def with_f0(self, f0_hz: np.ndarray) -> "PitchContour":
        f0 = np.asarray(f0_hz, dtype=np.float64)
        return PitchContour(f0, f0 > 0, self.rms, self.hop_s, self.f0_range)

    @property
    def voiced_fraction(self) -> float:
        return float(self.voiced.mean()) if len(self) else 0.0


def _frames(x: np.ndarray, spec: FrameSpec) -> np.ndarray:
    half = spec.n_fft // 2
    padded = np.pad(x, half, mode="reflect") if x.shape[0] > 1 else np.pad(x, half, mode="edge")
    n_frames = spec.n_frames(x.shape[0])
    return np.lib.stride_tricks.sliding_window_view(padded, spec.n_fft)[:: spec.hop][:n_frames]


def _difference(frames: np.ndarray, width: int, max_lag: int) -> np.ndarray:
    """d(tau) = sum_{j<width} (x_j - x_{j+tau})^2 for tau in [0, max_lag]."""
    n = frames.shape[1]
    size = 1 << int(np.ceil(np.log2(n + width)))
    head = np.fft.rfft(frames[:, :width], size, axis=1)
    full = np.fft.rfft(frames, size, axis=1)
    cross = np.fft.irfft(np.conj(head) * full, size, axis=1)[:, : max_lag + 1]
    sq = np.concatenate([np.zeros((frames.shape[0], 1)), np.cumsum(frames**2, axis=1)], axis=1)
    lags = np.arange(max_lag + 1)
    energy_head = sq[:, width][:, None]
    energy_shift = sq[:, lags + width] - sq[:, lags]
    return np.maximum(energy_head + energy_shift - 2.0 * cross, 0.0)


def _cmnd(diff: np.ndarray) -> np.ndarray:
    out = np.ones_like(diff)
    running = np.cumsum(diff[:, 1:], axis=1)
    lags = np.arange(1, diff.shape[1])
    with np.errstate(divide="ignore", invalid="ignore"):
        out[:, 1:] = np.where(running > 0, diff[:, 1:] * lags / running, 1.0)
    return out


def track_pitch(
    buffer: AudioBuffer,
    f0_range: Tuple[float, float] = DEFAULT_F0_RANGE,
    spec: FrameSpec = FrameSpec(),
    threshold: float = CMND_THRESHOLD,
) -> PitchContour:
    """Track f0 on the STFT frame grid of ``spec``.

    Each frame of ``n_fft`` samples is scored with the cumulative-mean-normalized
    difference function. The first lag whose score drops below ``threshold``
    is followed down to its local minimum and refined by parabolic
    interpolation; frames with no such lag are unvoiced.
    """
    f0_min, f0_max = f0_range
    sr = buffer.sample_rate_hz
    if len(buffer) == 0:
        raise ValidationError("cannot track pitch of an empty buffer")
    if not 0 < f0_min < f0_max:
        raise ValidationError(f"invalid f0 range {f0_range}")
    if sr < 8 * f0_max:
        raise ValidationError(f"sample rate {sr} Hz too low for f0_max {f0_max} Hz")
    min_lag = max(2, int(np.floor(sr / f0_max)))
    max_lag = int(np.ceil(sr / f0_min))
    width = spec.n_fft - max_lag - 1
    if width < max_lag // 2:
        raise ValidationError(f"n_fft {spec.n_fft} too short for f0_min {f0_min} Hz at {sr} Hz")

    frames = _frames(buffer.samples, spec)
    rms = np.sqrt(np.mean(frames**2, axis=1))
    cmnd = _cmnd(_difference(frames, width, max_lag + 1))

    f0 = np.zeros(frames.shape[0])
    for t in range(frames.shape[0]):
        if rms[t] < 1e-8:
            continue
        curve = cmnd[t]
        below = np.flatnonzero(curve[min_lag:max_lag + 1] < threshold)
        if below.size == 0:
            continue
        tau = min_lag + int(below[0])
        while tau + 1 <= max_lag and curve[tau + 1] < curve[tau]:
            tau += 1
        a, b, c = curve[tau - 1], curve[tau], curve[tau + 1]
        denom = a - 2.0 * b + c
        shift = 0.5 * (a - c) / denom if denom > 0 else 0.0
        freq = sr / (tau + float(np.clip(shift, -0.5, 0.5)))
        if f0_min <= freq <= f0_max:
            f0[t] = freq
    return PitchContour(f0, f0 > 0, rms, spec.hop / sr, (float(f0_min), float(f0_max)))
