"""Plot artifacts: mel images as binary PGM, waveforms and contours as CSV."""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Union

import numpy as np

from .errors import ValidationError
from .melspec import MelSpectrogram
from .prosody.pitch import PitchContour
from .prosody.segments import SegmentMap
from .signal_core import AudioBuffer

PathLike = Union[str, Path]


def mel_to_pgm_bytes(mel: Union[MelSpectrogram, np.ndarray]) -> bytes:
    values = mel.values if isinstance(mel, MelSpectrogram) else np.asarray(mel, dtype=np.float64)
    if values.size == 0:
        raise ValidationError("cannot render an empty mel spectrogram")
    frames, bands = values.shape
    lo, hi = float(values.min()), float(values.max())
    if hi == lo:
        pixels = np.zeros_like(values, dtype=np.uint8)
    else:
        pixels = np.round(255.0 * (values - lo) / (hi - lo)).astype(np.uint8)
    # rows run top to bottom, so the highest band comes first
    image = pixels.T[::-1]
    return f"P5\n{frames} {bands}\n255\n".encode("ascii") + image.tobytes()


def render_mel_pgm(mel: Union[MelSpectrogram, np.ndarray], out_path: PathLike) -> None:
    Path(out_path).write_bytes(mel_to_pgm_bytes(mel))


def dump_waveform_csv(buffer: AudioBuffer, out_path: PathLike, decimate: int = 1) -> None:
    if decimate < 1:
        raise ValidationError("decimate must be >= 1")
    sr = buffer.sample_rate_hz
    with open(out_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["time_s", "amplitude"])
        for i in range(0, len(buffer), decimate):
            w.writerow([repr(i / sr), repr(float(buffer.samples[i]))])


def dump_contour_csv(contour: PitchContour, seg_map: SegmentMap, out_path: PathLike) -> None:
    kinds = np.empty(len(contour), dtype=object)
    for i, seg in enumerate(seg_map.segments):
        kinds[seg.start_frame: seg.end_frame] = seg.kind
    with open(out_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["frame", "time_s", "f0_hz", "voiced", "rms", "segment"])
        for t in range(len(contour)):
            w.writerow([
                t,
                repr(t * contour.hop_s),
                repr(float(contour.f0_hz[t])),
                int(contour.voiced[t]),
                repr(float(contour.rms[t])),
                kinds[t],
            ])


def dump_segments_csv(seg_map: SegmentMap, hop_s: float, out_path: PathLike) -> None:
    targets = set(seg_map.emphasis_targets)
    with open(out_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "start_frame", "end_frame", "start_s", "end_s", "kind", "emphasis"])
        for i, seg in enumerate(seg_map.segments):
            w.writerow([
                i, seg.start_frame, seg.end_frame,
                repr(seg.start_frame * hop_s), repr(seg.end_frame * hop_s),
                seg.kind, int(i in targets),
            ])
