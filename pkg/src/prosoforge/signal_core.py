"""Audio buffers, WAV I/O, band-limited resampling and the STFT pair."""

from __future__ import annotations

import struct
import wave
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

from .errors import FormatError, UnsupportedFormatError, ValidationError

PathLike = Union[str, Path]

MIN_SAMPLE_RATE = 8000
RESAMPLE_TAPS = 32
KAISER_BETA = 8.6

_WAVE_FORMAT_PCM = 0x0001
_WAVE_FORMAT_IEEE_FLOAT = 0x0003
_WAVE_FORMAT_EXTENSIBLE = 0xFFFE


@dataclass(frozen=True)
class AudioBuffer:
    """Mono time-domain signal.

    ``samples`` is stored as a read-only float64 array.
    """

    samples: np.ndarray
    sample_rate_hz: int

    def __post_init__(self):
        data = np.array(self.samples, dtype=np.float64).reshape(-1)
        if not np.all(np.isfinite(data)):
            raise ValidationError("audio samples must be finite")
        if int(self.sample_rate_hz) != self.sample_rate_hz or self.sample_rate_hz < MIN_SAMPLE_RATE:
            raise ValidationError(
                f"sample rate must be an integer >= {MIN_SAMPLE_RATE} Hz, got {self.sample_rate_hz}"
            )
        data.flags.writeable = False
        object.__setattr__(self, "samples", data)
        object.__setattr__(self, "sample_rate_hz", int(self.sample_rate_hz))

    def __len__(self) -> int:
        return self.samples.shape[0]

    @property
    def duration_s(self) -> float:
        return len(self) / self.sample_rate_hz

    def with_samples(self, samples: np.ndarray) -> "AudioBuffer":
        return AudioBuffer(samples, self.sample_rate_hz)

    def peak_normalized(self, peak: float = 1.0) -> "AudioBuffer":
        """Scale down so that ``max|x| <= peak``; quieter signals are returned unchanged."""
        top = float(np.max(np.abs(self.samples))) if len(self) else 0.0
        if top <= peak:
            return self
        return self.with_samples(self.samples * (peak / top))


@dataclass(frozen=True)
class FrameSpec:
    n_fft: int = 1024
    hop: int = 256
    window: str = "hann_periodic"

    def __post_init__(self):
        if self.n_fft < 1 or self.n_fft & (self.n_fft - 1):
            raise ValidationError(f"n_fft must be a power of two, got {self.n_fft}")
        if not 1 <= self.hop <= self.n_fft:
            raise ValidationError(f"hop must lie in [1, n_fft], got {self.hop}")
        if self.window not in ("hann_periodic", "rect"):
            raise ValidationError(f"unknown window {self.window!r}")

    @property
    def n_bins(self) -> int:
        return self.n_fft // 2 + 1

    def n_frames(self, n_samples: int) -> int:
        return n_samples // self.hop + 1

    def window_array(self) -> np.ndarray:
        if self.window == "rect":
            return np.ones(self.n_fft)
        n = np.arange(self.n_fft)
        return 0.5 - 0.5 * np.cos(2.0 * np.pi * n / self.n_fft)

    def check_cola(self) -> None:
        limit = self.n_fft // 2 if self.window == "hann_periodic" else self.n_fft
        if self.hop > limit:
            raise ValidationError(
                f"hop {self.hop} breaks overlap-add reconstruction for {self.window} "
                f"window with n_fft {self.n_fft} (max hop {limit})"
            )


# ---------------------------------------------------------------------------
# WAV I/O
# ---------------------------------------------------------------------------


def read_wav(path: PathLike) -> AudioBuffer:
    """Read a RIFF/WAVE file holding PCM16, PCM24 or float32 samples.

    Stereo input is downmixed by averaging the two channels.
    """
    raw = Path(path).read_bytes()
    if len(raw) < 12 or raw[:4] != b"RIFF" or raw[8:12] != b"WAVE":
        raise FormatError(f"{path}: not a RIFF/WAVE file")

    fmt = None
    data = None
    pos = 12
    while pos + 8 <= len(raw):
        chunk_id = raw[pos:pos + 4]
        (size,) = struct.unpack("<I", raw[pos + 4:pos + 8])
        body = raw[pos + 8:pos + 8 + size]
        if chunk_id == b"fmt ":
            if len(body) < 16:
                raise FormatError(f"{path}: truncated fmt chunk")
            fmt = struct.unpack("<HHIIHH", body[:16])
            if fmt[0] == _WAVE_FORMAT_EXTENSIBLE and len(body) >= 26:
                (sub,) = struct.unpack("<H", body[24:26])
                fmt = (sub,) + fmt[1:]
        elif chunk_id == b"data":
            data = body
        pos += 8 + size + (size & 1)

    if fmt is None or data is None:
        raise FormatError(f"{path}: missing fmt or data chunk")
    codec, channels, rate, _, block_align, bits = fmt
    if channels not in (1, 2):
        raise UnsupportedFormatError(f"{path}: {channels} channels not supported")
    if block_align != channels * bits // 8 or block_align == 0:
        raise FormatError(f"{path}: inconsistent block alignment")
    usable = len(data) - len(data) % block_align

    if codec == _WAVE_FORMAT_PCM and bits == 16:
        values = np.frombuffer(data[:usable], dtype="<i2").astype(np.float64) / 32768.0
    elif codec == _WAVE_FORMAT_PCM and bits == 24:
        b = np.frombuffer(data[:usable], dtype=np.uint8).reshape(-1, 3).astype(np.int32)
        ints = b[:, 0] | (b[:, 1] << 8) | (b[:, 2] << 16)
        ints = np.where(ints >= 1 << 23, ints - (1 << 24), ints)
        values = ints.astype(np.float64) / float(1 << 23)
    elif codec == _WAVE_FORMAT_IEEE_FLOAT and bits == 32:
        values = np.frombuffer(data[:usable], dtype="<f4").astype(np.float64)
    else:
        raise UnsupportedFormatError(f"{path}: codec {codec} with {bits} bits not supported")

    values = values.reshape(-1, channels).mean(axis=1)
    return AudioBuffer(values, rate)


def write_wav(buffer: AudioBuffer, path: PathLike) -> None:
    """Write ``buffer`` as mono PCM16."""
    ints = np.clip(np.round(buffer.samples * 32768.0), -32768, 32767).astype("<i2")
    with open(path, "wb") as fh, wave.open(fh, "wb") as w:
        w.setnchannels(1)
        w.setsampwidth(2)
        w.setframerate(buffer.sample_rate_hz)
        w.writeframes(ints.tobytes())


# ---------------------------------------------------------------------------
# Resampling
# ---------------------------------------------------------------------------


def _kaiser(t: np.ndarray, half_width: np.ndarray) -> np.ndarray:
    r = np.clip(t / half_width, -1.0, 1.0)
    return np.i0(KAISER_BETA * np.sqrt(1.0 - r * r)) / np.i0(KAISER_BETA)


def sinc_interpolate(x: np.ndarray, positions: np.ndarray, cutoff=1.0, chunk: int = 8192) -> np.ndarray:
    """Evaluate ``x`` at fractional sample ``positions`` with a Kaiser-windowed sinc.

    ``cutoff`` is the lowpass edge relative to the input Nyquist (scalar or one
    value per position); the kernel spans ``RESAMPLE_TAPS / cutoff`` input
    samples on each side. Samples outside ``x`` count as zero.
    """
    x = np.asarray(x, dtype=np.float64)
    positions = np.asarray(positions, dtype=np.float64)
    cutoff = np.broadcast_to(np.asarray(cutoff, dtype=np.float64), positions.shape)
    if positions.size == 0:
        return np.zeros(0)
    if np.any(cutoff <= 0) or np.any(cutoff > 1):
        raise ValidationError("cutoff must lie in (0, 1]")

    reach = int(np.ceil(RESAMPLE_TAPS / cutoff.min()))
    padded = np.concatenate([np.zeros(reach + 1), x, np.zeros(reach + 2)])
    offsets = np.arange(-reach, reach + 1)
    out = np.empty(positions.shape[0])
    for start in range(0, positions.shape[0], chunk):
        pos = positions[start:start + chunk]
        fc = cutoff[start:start + chunk, None]
        base = np.floor(pos).astype(np.int64)
        idx = base[:, None] + offsets[None, :]
        t = pos[:, None] - idx
        half = RESAMPLE_TAPS / fc
        kern = fc * np.sinc(fc * t) * _kaiser(t, half)
        kern[np.abs(t) > half] = 0.0
        out[start:start + chunk] = np.sum(padded[idx + reach + 1] * kern, axis=1)
    return out


def resample(buffer: AudioBuffer, target_hz: int) -> AudioBuffer:
    """Band-limited sample-rate conversion to ``target_hz``."""
    if int(target_hz) != target_hz or target_hz < MIN_SAMPLE_RATE:
        raise ValidationError(f"target rate must be an integer >= {MIN_SAMPLE_RATE} Hz")
    source = buffer.sample_rate_hz
    if target_hz == source:
        return AudioBuffer(buffer.samples.copy(), source)
    n_out = int(round(len(buffer) * target_hz / source))
    positions = np.arange(n_out) * (source / target_hz)
    cutoff = min(1.0, target_hz / source)
    return AudioBuffer(sinc_interpolate(buffer.samples, positions, cutoff), int(target_hz))


# ---------------------------------------------------------------------------
# STFT / ISTFT
# ---------------------------------------------------------------------------


def stft(buffer: Union[AudioBuffer, np.ndarray], spec: FrameSpec) -> np.ndarray:
    """Centered STFT, returned as a ``frames x (n_fft/2 + 1)`` complex array.

    The signal is reflect-padded by ``n_fft/2`` on both sides so frame ``t`` is
    centered on sample ``t * hop`` and there are ``len // hop + 1`` frames.
    """
    x = buffer.samples if isinstance(buffer, AudioBuffer) else np.asarray(buffer, dtype=np.float64)
    if x.shape[0] < 1:
        raise ValidationError("cannot transform an empty signal")
    half = spec.n_fft // 2
    padded = np.pad(x, half, mode="reflect") if x.shape[0] > 1 else np.pad(x, half, mode="edge")
    n_frames = spec.n_frames(x.shape[0])
    frames = np.lib.stride_tricks.sliding_window_view(padded, spec.n_fft)[:: spec.hop][:n_frames]
    return np.fft.rfft(frames * spec.window_array(), axis=1)


def istft(spectrogram: np.ndarray, spec: FrameSpec, sample_rate_hz: int = 16000) -> AudioBuffer:
    """Weighted overlap-add inverse of :func:`stft`.

    Output length is ``(frames - 1) * hop``.
    """
    spec.check_cola()
    spectrogram = np.asarray(spectrogram)
    if spectrogram.ndim != 2 or spectrogram.shape[1] != spec.n_bins:
        raise ValidationError(f"expected frames x {spec.n_bins} spectrogram, got {spectrogram.shape}")
    n_frames = spectrogram.shape[0]
    win = spec.window_array()
    frames = np.fft.irfft(spectrogram, n=spec.n_fft, axis=1) * win

    total = (n_frames - 1) * spec.hop + spec.n_fft
    out = np.zeros(total)
    norm = np.zeros(total)
    wsq = win * win
    for t in range(n_frames):
        s = t * spec.hop
        out[s:s + spec.n_fft] += frames[t]
        norm[s:s + spec.n_fft] += wsq
    nonzero = norm > 1e-10
    out[nonzero] /= norm[nonzero]
    half = spec.n_fft // 2
    return AudioBuffer(out[half:total - half], sample_rate_hz)
