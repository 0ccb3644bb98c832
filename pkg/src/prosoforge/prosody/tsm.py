"""Time-scale modification (WSOLA) and resample-based pitch shifting.

Both operations accept either a single factor or a piecewise-constant
schedule given as ``(start_sample, end_sample, factor)`` triples that tile
the buffer.
"""

from __future__ import annotations

from typing import List, Sequence, Tuple, Union

import numpy as np

from ..errors import ValidationError
from ..signal_core import AudioBuffer, sinc_interpolate

FRAME_S = 0.025
TOLERANCE_S = 0.005
FACTOR_RANGE = (0.5, 2.0)

Schedule = Union[float, Sequence[Tuple[int, int, float]]]


def _pieces(schedule: Schedule, n: int, what: str) -> List[Tuple[int, int, float]]:
    if np.isscalar(schedule):
        pieces = [(0, n, float(schedule))]
    else:
        pieces = [(int(s), int(e), float(r)) for s, e, r in schedule]
        pieces = [p for p in pieces if p[1] > p[0]]
    lo, hi = FACTOR_RANGE
    pos = 0
    for s, e, r in pieces:
        if not lo <= r <= hi:
            raise ValidationError(f"{what} {r} outside [{lo}, {hi}]")
        if s != pos:
            raise ValidationError(f"{what} schedule must tile the buffer contiguously (gap at {pos})")
        pos = e
    if pos != n:
        raise ValidationError(f"{what} schedule covers {pos} samples, buffer has {n}")
    return pieces


def stretched_length(pieces: Sequence[Tuple[int, int, float]]) -> int:
    return int(round(sum((e - s) / r for s, e, r in pieces)))


def _hann(n: int) -> np.ndarray:
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(n) / n)


def time_stretch(buffer: AudioBuffer, rate: Schedule) -> AudioBuffer:
    """WSOLA time-scale modification; a piece of length ``L`` at ``rate`` lasts ``L / rate``.

    25 ms Hann frames are laid down every half frame in the output. Each is
    read from the input near the position the time map predicts, shifted by
    up to +-5 ms to best match the natural continuation of the previous frame.
    """
    x = buffer.samples
    n = x.shape[0]
    pieces = _pieces(rate, n, "rate")
    if all(r == 1.0 for _, _, r in pieces):
        return AudioBuffer(x.copy(), buffer.sample_rate_hz)

    sr = buffer.sample_rate_hz
    win_len = 2 * int(round(FRAME_S * sr / 2))
    hop = win_len // 2
    tol = int(round(TOLERANCE_S * sr))
    out_len = stretched_length(pieces)

    out_breaks = np.concatenate([[0.0], np.cumsum([(e - s) / r for s, e, r in pieces])])
    in_breaks = np.array([p[0] for p in pieces] + [n], dtype=np.float64)
    window = _hann(win_len)

    margin = win_len + 2 * tol + hop
    padded = np.concatenate([np.zeros(margin), x, np.zeros(margin)])
    half = win_len // 2

    n_frames = out_len // hop + 2
    out = np.zeros(n_frames * hop + win_len)
    norm = np.zeros_like(out)
    prev = None
    for k in range(n_frames):
        centre = float(np.interp(k * hop, out_breaks, in_breaks))
        nominal = int(round(centre))
        if prev is None:
            chosen = nominal
        else:
            target = padded[margin + prev + hop - half: margin + prev + hop + half]
            lo = margin + nominal - tol - half
            region = padded[lo: lo + win_len + 2 * tol]
            score = np.correlate(region, target, mode="valid")
            chosen = nominal - tol + int(np.argmax(score)) if np.any(score) else nominal
        frame = padded[margin + chosen - half: margin + chosen + half]
        out[k * hop: k * hop + win_len] += frame * window
        norm[k * hop: k * hop + win_len] += window
        prev = chosen

    # output frame k is centred on sample k * hop
    out = out[half: half + out_len]
    norm = norm[half: half + out_len]
    nz = norm > 1e-8
    out[nz] /= norm[nz]
    return AudioBuffer(out, sr)


def shift_pitch(buffer: AudioBuffer, ratio: Schedule) -> AudioBuffer:
    """Multiply pitch by ``ratio`` per piece while keeping each piece's duration.

    Each piece is resampled to ``1/ratio`` of its length (raising pitch by
    ``ratio``), then WSOLA stretches it back to its original length.
    """
    x = buffer.samples
    n = x.shape[0]
    pieces = _pieces(ratio, n, "ratio")
    if all(r == 1.0 for _, _, r in pieces):
        return AudioBuffer(x.copy(), buffer.sample_rate_hz)

    positions = []
    cutoffs = []
    stretch = []
    cursor = 0
    for s, e, r in pieces:
        m = max(1, int(round((e - s) / r)))
        positions.append(s + np.arange(m) * ((e - s) / m))
        cutoffs.append(np.full(m, min(1.0, m / (e - s))))
        # the resampled piece has length m and must return to e - s
        stretch.append((cursor, cursor + m, m / (e - s)))
        cursor += m
    squeezed = sinc_interpolate(x, np.concatenate(positions), np.concatenate(cutoffs))
    stretch = [(s, e, float(np.clip(r, *FACTOR_RANGE))) for s, e, r in stretch]
    restored = time_stretch(AudioBuffer(squeezed, buffer.sample_rate_hz), stretch)
    y = restored.samples
    if y.shape[0] != n:
        y = np.pad(y, (0, max(0, n - y.shape[0])))[:n]
    return AudioBuffer(y, buffer.sample_rate_hz)
