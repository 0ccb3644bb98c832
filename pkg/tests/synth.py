"""Deterministic test signals."""

import numpy as np

from prosoforge.signal_core import AudioBuffer

SR = 16000


def tone(freq, seconds, sr=SR, amp=0.5):
    t = np.arange(int(round(seconds * sr))) / sr
    return AudioBuffer(amp * np.sin(2 * np.pi * freq * t), sr)


def silence(seconds, sr=SR):
    return AudioBuffer(np.zeros(int(round(seconds * sr))), sr)


def concat(*bufs):
    return AudioBuffer(np.concatenate([b.samples for b in bufs]), bufs[0].sample_rate_hz)


def chirp(f_start, f_end, seconds, sr=SR, amp=0.5):
    t = np.arange(int(round(seconds * sr))) / sr
    rate = (f_end - f_start) / seconds
    return AudioBuffer(amp * np.sin(2 * np.pi * (f_start * t + 0.5 * rate * t * t)), sr)


def harmonic_fixture(seed=0, f0=125.0, seconds=1.0, noise=0.01, sr=SR):
    """Three harmonics plus white noise."""
    rng = np.random.default_rng(seed)
    t = np.arange(int(round(seconds * sr))) / sr
    x = sum(a * np.sin(2 * np.pi * k * f0 * t) for k, a in ((1, 0.4), (2, 0.2), (3, 0.1)))
    return AudioBuffer(x + noise * rng.standard_normal(t.size), sr)


def vibrato_fixture(seed=7, seconds=2.0, base=180.0, depth_semitones=2.0, rate_hz=3.0, sr=SR):
    """Voiced-like tone whose f0 swings +-depth semitones sinusoidally."""
    rng = np.random.default_rng(seed)
    t = np.arange(int(round(seconds * sr))) / sr
    f = base * 2.0 ** (depth_semitones * np.sin(2 * np.pi * rate_hz * t) / 12.0)
    phase = 2 * np.pi * np.cumsum(f) / sr
    x = 0.5 * np.sin(phase) + 0.2 * np.sin(2 * phase) + 0.005 * rng.standard_normal(t.size)
    return AudioBuffer(x, sr)


def tone_pause_tone(pause_s=0.5, freq=200.0, tone_s=1.0):
    return concat(tone(freq, tone_s), silence(pause_s), tone(freq, tone_s))


def corpus():
    """Named fixtures used for self-evaluation checks."""
    return {
        "tone200": tone(200.0, 1.0),
        "harmonic": harmonic_fixture(),
        "vibrato": vibrato_fixture(),
        "tone_pause_tone": tone_pause_tone(),
        "chirp": chirp(200.0, 300.0, 1.5),
    }


def peak_frequency(x, sr):
    spectrum = np.abs(np.fft.rfft(x * np.hanning(len(x))))
    return np.argmax(spectrum) * sr / len(x), sr / len(x)


def semitone_std(contour):
    v = contour.f0_hz[contour.voiced]
    return float(np.std(12.0 * np.log2(v)))
