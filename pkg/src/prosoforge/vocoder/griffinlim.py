"""Mel inversion and Griffin-Lim phase recovery."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List

import numpy as np

from ..errors import ValidationError
from ..melspec import MelFilterbank, MelSpectrogram
from ..signal_core import AudioBuffer, FrameSpec, istft, stft

WEIGHT_EPS = 1e-8


def mel_pseudo_inverse(mel: MelSpectrogram, bank: MelFilterbank) -> np.ndarray:
    """Approximate linear magnitudes (frames x bins) from a log-mel spectrogram.

    Each FFT bin receives the filter-weighted average of the mel energies
    that cover it; bins no filter touches come back as zero.
    """
    if not mel.matches(bank):
        raise ValidationError("mel spectrogram was not produced with this filterbank")
    linear = np.exp(mel.values)
    col_sums = bank.weights.sum(axis=0)
    back = bank.weights.T / (col_sums[:, None] + WEIGHT_EPS)
    return np.maximum(linear @ back.T, 0.0)


def spectral_convergence(target: np.ndarray, estimate: np.ndarray) -> float:
    ref = np.linalg.norm(target)
    if ref == 0:
        return 0.0
    return float(np.linalg.norm(target - estimate) / ref)


@dataclass(frozen=True)
class GriffinLimResult:
    audio: AudioBuffer
    sc_initial: float
    sc_final: float
    sc_history: List[float]


def griffin_lim(
    magnitude: np.ndarray,
    spec: FrameSpec,
    n_iter: int = 60,
    sample_rate_hz: int = 16000,
) -> GriffinLimResult:
    """Alternate between the target magnitude and consistent spectrograms.

    Starts from the zero-phase inverse; bins whose estimate has zero
    magnitude take phase 1.
    """
    magnitude = np.asarray(magnitude, dtype=np.float64)
    if n_iter < 0:
        raise ValidationError("n_iter must be >= 0")
    if np.any(magnitude < 0) or not np.all(np.isfinite(magnitude)):
        raise ValidationError("magnitudes must be finite and non-negative")

    x = istft(magnitude.astype(np.complex128), spec, sample_rate_hz)

    def measure(signal: AudioBuffer):
        est = stft(signal, spec)[: magnitude.shape[0]]
        return est, spectral_convergence(magnitude, np.abs(est))

    est, sc = measure(x)
    history = [sc]
    for _ in range(n_iter):
        mag = np.abs(est)
        phase = np.ones_like(est)
        nz = mag > 0
        phase[nz] = est[nz] / mag[nz]
        x = istft(magnitude * phase, spec, sample_rate_hz)
        est, sc = measure(x)
        history.append(sc)
    return GriffinLimResult(x, history[0], history[-1], history)
