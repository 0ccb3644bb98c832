"""Emphasis and the end-to-end read-to-conversational conversion."""

from __future__ import annotations

from typing import List, Sequence, Tuple

import numpy as np

from ..errors import ValidationError
from ..signal_core import AudioBuffer, FrameSpec
from .contour import transform_contour
from .pitch import DEFAULT_F0_RANGE, PitchContour, track_pitch
from .profile import ProsodyProfile
from .segments import PAUSE, SPEECH, SegmentMap, detect_segments
from .tsm import FACTOR_RANGE, shift_pitch, time_stretch

FADE_S = 0.010
PITCH_BLOCK_S = 0.05


def _emphasize(x: np.ndarray, ranges: Sequence[Tuple[int, int]], gain_db: float, sr: int) -> np.ndarray:
    gain = 10.0 ** (gain_db / 20.0)
    envelope = np.ones_like(x)
    fade = int(round(FADE_S * sr))
    for s, e in ranges:
        if e <= s:
            continue
        f = max(1, min(fade, (e - s) // 2))
        env = np.full(e - s, gain)
        ramp = 1.0 + (gain - 1.0) * np.arange(1, f + 1) / f
        env[:f] = ramp
        env[e - s - f:] = np.minimum(env[e - s - f:], ramp[::-1])
        envelope[s:e] = env
    return x * envelope


def apply_emphasis(buffer: AudioBuffer, seg_map: SegmentMap, gain_db: float, hop: int = 256) -> AudioBuffer:
    """Boost the emphasis-target segments by ``gain_db`` with 10 ms linear fades.

    If the boost would clip, the whole output is scaled down to peak 1.0.
    """
    if not 0.0 <= gain_db <= 12.0:
        raise ValidationError(f"gain_db must lie in [0, 12], got {gain_db}")
    if gain_db == 0.0 or not seg_map.emphasis_targets:
        return AudioBuffer(buffer.samples.copy(), buffer.sample_rate_hz)
    bounds = seg_map.sample_bounds(hop, len(buffer))
    ranges = [bounds[i] for i in seg_map.emphasis_targets]
    y = _emphasize(buffer.samples, ranges, gain_db, buffer.sample_rate_hz)
    return AudioBuffer(y, buffer.sample_rate_hz).peak_normalized()


def _pitch_is_identity(profile: ProsodyProfile) -> bool:
    return (
        profile.pitch_shift_semitones == 0.0
        and profile.pitch_range_scale == 1.0
        and (profile.final_contour.kind == "none" or profile.final_contour.extent_semitones == 0.0)
    )


def _ratio_blocks(
    contour: PitchContour, target: PitchContour, seg_map: SegmentMap, block_frames: int
) -> List[Tuple[int, int, float]]:
    """Per-block median of ``target / contour`` over voiced frames, in frame units."""
    blocks = []
    voiced = contour.voiced & target.voiced
    frame_ratio = np.ones(len(contour))
    frame_ratio[voiced] = target.f0_hz[voiced] / contour.f0_hz[voiced]
    for seg in seg_map.segments:
        if seg.kind == PAUSE:
            blocks.append((seg.start_frame, seg.end_frame, 1.0))
            continue
        for s in range(seg.start_frame, seg.end_frame, block_frames):
            e = min(s + block_frames, seg.end_frame)
            sel = voiced[s:e]
            r = float(np.median(frame_ratio[s:e][sel])) if sel.any() else 1.0
            blocks.append((s, e, float(np.clip(r, *FACTOR_RANGE))))
    return blocks


def convert(
    buffer: AudioBuffer,
    profile: ProsodyProfile,
    spec: FrameSpec = FrameSpec(),
    f0_range: Tuple[float, float] = DEFAULT_F0_RANGE,
    min_pause_s: float = 0.15,
    threshold_ratio: float = 0.1,
) -> AudioBuffer:
    """Re-speak ``buffer`` with the intonation, timing and stress of ``profile``.

    Stages: pitch tracking, speech/pause segmentation, contour reshaping,
    tempo/pause stretching, block-wise pitch shifting toward the reshaped
    contour, emphasis, and a final peak limit.
    """
    if buffer.duration_s < 0.5:
        raise ValidationError(f"need at least 0.5 s of audio, got {buffer.duration_s:.3f} s")
    n = len(buffer)
    sr = buffer.sample_rate_hz
    hop = spec.hop

    contour = track_pitch(buffer, f0_range, spec)
    seg_map = detect_segments(contour, min_pause_s, threshold_ratio, profile.emphasis_top_fraction)
    bounds = seg_map.sample_bounds(hop, n)

    rates = [
        (s, e, profile.tempo if seg.kind == SPEECH else 1.0 / profile.pause_scale)
        for seg, (s, e) in zip(seg_map.segments, bounds)
    ]
    stretched = time_stretch(buffer, rates)

    def to_output(sample: int) -> int:
        pos = 0.0
        for s, e, r in rates:
            if sample <= e:
                return int(round(pos + (sample - s) / r))
            pos += (e - s) / r
        return int(round(pos))

    out_len = len(stretched)
    result = stretched
    if not _pitch_is_identity(profile):
        target = transform_contour(contour, profile)
        block_frames = max(1, int(round(PITCH_BLOCK_S / contour.hop_s)))
        pieces = []
        for fs, fe, r in _ratio_blocks(contour, target, seg_map, block_frames):
            s = to_output(min(fs * hop, n))
            e = to_output(min(fe * hop, n)) if fe < seg_map.n_frames else out_len
            if e <= s:
                continue
            if pieces and pieces[-1][2] == r:
                pieces[-1] = (pieces[-1][0], e, r)
            else:
                pieces.append((s, e, r))
        if pieces:
            pieces[-1] = (pieces[-1][0], out_len, pieces[-1][2])
            result = shift_pitch(stretched, pieces)

    if profile.emphasis_gain_db > 0 and seg_map.emphasis_targets:
        ranges = [(to_output(bounds[i][0]), to_output(bounds[i][1])) for i in seg_map.emphasis_targets]
        result = result.with_samples(_emphasize(result.samples, ranges, profile.emphasis_gain_db, sr))
    return result.peak_normalized()
