"""Mel filterbanks, log-Mel spectrograms and MFCCs."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.fft import dct, idct

from .errors import ValidationError
from .signal_core import AudioBuffer, FrameSpec, stft

LOG_FLOOR = 1e-5


def hz_to_mel(f_hz):
    """HTK mel scale, ``2595 * log10(1 + f / 700)``."""
    f = np.asarray(f_hz, dtype=np.float64)
    if np.any(f < 0):
        raise ValidationError("frequency must be non-negative")
    mel = 2595.0 * np.log10(1.0 + f / 700.0)
    return float(mel) if mel.ndim == 0 else mel


def mel_to_hz(mel):
    m = np.asarray(mel, dtype=np.float64)
    if np.any(m < 0):
        raise ValidationError("mel value must be non-negative")
    f = 700.0 * (10.0 ** (m / 2595.0) - 1.0)
    return float(f) if f.ndim == 0 else f


@dataclass(frozen=True)
class MelFilterbank:
    weights: np.ndarray  # n_mels x bins
    center_freqs_hz: np.ndarray
    sample_rate_hz: int
    n_fft: int
    n_mels: int
    fmin_hz: float
    fmax_hz: float

    def params(self) -> dict:
        return {
            "sample_rate_hz": self.sample_rate_hz,
            "n_fft": self.n_fft,
            "n_mels": self.n_mels,
            "fmin_hz": self.fmin_hz,
            "fmax_hz": self.fmax_hz,
        }


def build_mel_filterbank(
    sample_rate_hz: int = 16000,
    n_fft: int = 1024,
    n_mels: int = 80,
    fmin_hz: float = 0.0,
    fmax_hz: Optional[float] = None,
) -> MelFilterbank:
    """Triangular filters with peaks equally spaced on the mel axis.

    Filter ``m`` rises linearly (in Hz) from edge point ``m`` to its peak at
    point ``m + 1`` and falls back to zero at point ``m + 2``, where the
    ``n_mels + 2`` points span ``[fmin_hz, fmax_hz]`` uniformly in mel.
    """
    if fmax_hz is None:
        fmax_hz = sample_rate_hz / 2.0
    if n_mels < 1:
        raise ValidationError("n_mels must be >= 1")
    if not 0.0 <= fmin_hz < fmax_hz <= sample_rate_hz / 2.0:
        raise ValidationError(
            f"need 0 <= fmin < fmax <= sr/2, got fmin={fmin_hz}, fmax={fmax_hz}, sr={sample_rate_hz}"
        )
    edges = mel_to_hz(np.linspace(hz_to_mel(fmin_hz), hz_to_mel(fmax_hz), n_mels + 2))
    # the mel round trip is inexact; keep the band edges where they were asked for
    edges[0], edges[-1] = fmin_hz, fmax_hz
    bin_freqs = np.arange(n_fft // 2 + 1) * sample_rate_hz / n_fft

    lower, center, upper = edges[:-2, None], edges[1:-1, None], edges[2:, None]
    rising = (bin_freqs[None, :] - lower) / (center - lower)
    falling = (upper - bin_freqs[None, :]) / (upper - center)
    weights = np.maximum(0.0, np.minimum(rising, falling))

    empty = np.flatnonzero(weights.max(axis=1) <= 0)
    if empty.size:
        raise ValidationError(
            f"{empty.size} mel filters fall between FFT bins; reduce n_mels or raise n_fft"
        )
    return MelFilterbank(
        weights=weights,
        center_freqs_hz=edges[1:-1].copy(),
        sample_rate_hz=int(sample_rate_hz),
        n_fft=int(n_fft),
        n_mels=int(n_mels),
        fmin_hz=float(fmin_hz),
        fmax_hz=float(fmax_hz),
    )


@dataclass(frozen=True)
class MelSpectrogram:
    values: np.ndarray  # frames x n_mels, natural-log magnitudes
    sample_rate_hz: int
    n_fft: int
    hop: int
    n_mels: int
    fmin_hz: float
    fmax_hz: float

    @property
    def n_frames(self) -> int:
        return self.values.shape[0]

    def matches(self, bank: MelFilterbank) -> bool:
        return (
            self.sample_rate_hz == bank.sample_rate_hz
            and self.n_fft == bank.n_fft
            and self.n_mels == bank.n_mels
            and self.fmin_hz == bank.fmin_hz
            and self.fmax_hz == bank.fmax_hz
        )


@dataclass(frozen=True)
class MfccMatrix:
    values: np.ndarray  # frames x K, c_1..c_K

    @property
    def n_frames(self) -> int:
        return self.values.shape[0]

    @property
    def n_coeffs(self) -> int:
        return self.values.shape[1]


def mel_spectrogram(buffer: AudioBuffer, spec: FrameSpec, bank: MelFilterbank) -> MelSpectrogram:
    if bank.sample_rate_hz != buffer.sample_rate_hz or bank.n_fft != spec.n_fft:
        raise ValidationError(
            f"filterbank built for sr={bank.sample_rate_hz}, n_fft={bank.n_fft}; "
            f"got sr={buffer.sample_rate_hz}, n_fft={spec.n_fft}"
        )
    magnitude = np.abs(stft(buffer, spec))
    values = np.log(np.maximum(magnitude @ bank.weights.T, LOG_FLOOR))
    return MelSpectrogram(
        values=values,
        sample_rate_hz=bank.sample_rate_hz,
        n_fft=bank.n_fft,
        hop=spec.hop,
        n_mels=bank.n_mels,
        fmin_hz=bank.fmin_hz,
        fmax_hz=bank.fmax_hz,
    )


def mfcc(mel: MelSpectrogram, n_coeffs: int = 13) -> MfccMatrix:
    """Orthonormal DCT-II of each log-mel frame, keeping c_1..c_K (c_0 dropped)."""
    if not 1 <= n_coeffs <= mel.n_mels - 1:
        raise ValidationError(f"K must lie in [1, {mel.n_mels - 1}], got {n_coeffs}")
    full = dct(mel.values, type=2, norm="ortho", axis=1)
    return MfccMatrix(full[:, 1:n_coeffs + 1].copy())


def cepstrum(log_mel: np.ndarray) -> np.ndarray:
    """Full orthonormal DCT-II (all coefficients including c_0)."""
    return dct(np.asarray(log_mel, dtype=np.float64), type=2, norm="ortho", axis=-1)


def inverse_cepstrum(coeffs: np.ndarray) -> np.ndarray:
    return idct(np.asarray(coeffs, dtype=np.float64), type=2, norm="ortho", axis=-1)
