"""Speech/pause segmentation on the pitch-contour frame grid."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from .pitch import PitchContour

SPEECH = "speech"
PAUSE = "pause"


@dataclass(frozen=True)
class Segment:
    start_frame: int
    end_frame: int
    kind: str

    @property
    def n_frames(self) -> int:
        return self.end_frame - self.start_frame


@dataclass(frozen=True)
class SegmentMap:
    segments: Tuple[Segment, ...]
    emphasis_targets: Tuple[int, ...] = field(default_factory=tuple)

    @property
    def n_frames(self) -> int:
        return self.segments[-1].end_frame if self.segments else 0

    def pauses(self) -> List[Segment]:
        return [s for s in self.segments if s.kind == PAUSE]

    def sample_bounds(self, hop: int, n_samples: int) -> List[Tuple[int, int]]:
        """Sample ranges tiling ``[0, n_samples)``; frame ``t`` starts at ``t * hop``."""
        cuts = [min(s.start_frame * hop, n_samples) for s in self.segments] + [n_samples]
        return [(cuts[i], cuts[i + 1]) for i in range(len(self.segments))]


def _runs(mask: np.ndarray) -> List[Tuple[int, int, bool]]:
    if mask.size == 0:
        return []
    edges = np.flatnonzero(np.diff(mask.astype(np.int8))) + 1
    starts = np.concatenate([[0], edges])
    ends = np.concatenate([edges, [mask.size]])
    return [(int(s), int(e), bool(mask[s])) for s, e in zip(starts, ends)]


def _peak_frames(contour: PitchContour) -> np.ndarray:
    f0 = contour.f0_hz
    if len(f0) == 0:
        return np.zeros(0, dtype=int)
    left = np.concatenate([[-np.inf], f0[:-1]])
    right = np.concatenate([f0[1:], [-np.inf]])
    return np.flatnonzero(contour.voiced & (f0 >= left) & (f0 >= right))


def detect_segments(
    contour: PitchContour,
    min_pause_s: float = 0.15,
    threshold_ratio: float = 0.1,
    emphasis_top_fraction: float = 0.2,
) -> SegmentMap:
    """Split the frame grid into speech and pause segments.

    A pause is a run of frames whose RMS is below ``threshold_ratio`` times
    the median frame RMS and which lasts at least ``min_pause_s``. Shorter quiet
    runs stay inside the surrounding speech. Emphasis targets are the speech
    segments holding the highest ``emphasis_top_fraction`` of voiced f0 peaks.
    """
    n = len(contour)
    threshold = threshold_ratio * float(np.median(contour.rms)) if n else 0.0
    quiet = contour.rms <= threshold if threshold <= 0 else contour.rms < threshold
    min_frames = max(1, int(np.ceil(min_pause_s / contour.hop_s - 1e-9)))

    is_pause = np.zeros(n, dtype=bool)
    for s, e, q in _runs(quiet):
        if q and e - s >= min_frames:
            is_pause[s:e] = True
    segments = tuple(Segment(s, e, PAUSE if p else SPEECH) for s, e, p in _runs(is_pause))

    targets: Tuple[int, ...] = ()
    peaks = _peak_frames(contour)
    if peaks.size and emphasis_top_fraction > 0:
        n_top = int(np.ceil(emphasis_top_fraction * peaks.size))
        order = np.argsort(-contour.f0_hz[peaks], kind="stable")[:n_top]
        chosen = set()
        for frame in peaks[order]:
            for i, seg in enumerate(segments):
                if seg.kind == SPEECH and seg.start_frame <= frame < seg.end_frame:
                    chosen.add(i)
        targets = tuple(sorted(chosen))
    return SegmentMap(segments, targets)
