"""Log-domain intonation reshaping."""

from __future__ import annotations

from typing import Optional, Tuple

import numpy as np

from ..errors import ComputationError
from .pitch import PitchContour
from .profile import ProsodyProfile


def _last_voiced_run(voiced: np.ndarray) -> Tuple[int, int]:
    end = int(np.flatnonzero(voiced)[-1]) + 1
    start = end
    while start > 0 and voiced[start - 1]:
        start -= 1
    return start, end


def transform_contour(
    contour: PitchContour,
    profile: ProsodyProfile,
    f0_range: Optional[Tuple[float, float]] = None,
) -> PitchContour:
    """Apply shift, range scaling and a final rise/fall to voiced frames.

    Around the geometric mean ``mu`` of the voiced f0 values::

        ln f0' = ln mu + shift * ln2 / 12 + scale * (ln f0 - ln mu)

    The final-contour ramp is linear in semitones and reaches its full extent
    on the last voiced frame. Results are clamped to ``f0_range`` (the
    contour's own range by default); unvoiced frames pass through untouched.
    """
    voiced = contour.voiced
    if not voiced.any():
        raise ComputationError("nothing to transform: contour has no voiced frames")
    lo, hi = contour.f0_range if f0_range is None else f0_range

    f0_voiced = contour.f0_hz[voiced]
    log_dev = np.log(f0_voiced) - np.log(f0_voiced).mean()

    semitones = np.full(len(contour), float(profile.pitch_shift_semitones))
    final = profile.final_contour
    if final.kind != "none" and final.extent_semitones > 0:
        start, end = _last_voiced_run(voiced)
        n_tail = max(1, int(round(final.tail_fraction * (end - start))))
        sign = 1.0 if final.kind == "rise" else -1.0
        semitones[end - n_tail:end] += sign * final.extent_semitones * np.arange(1, n_tail + 1) / n_tail
    # written as a ratio so the identity profile leaves f0 bit-exact
    ratio = 2.0 ** (semitones[voiced] / 12.0) * np.exp((profile.pitch_range_scale - 1.0) * log_dev)

    f0 = contour.f0_hz.copy()
    f0[voiced] = np.clip(f0_voiced * ratio, lo, hi)
    return contour.with_f0(f0)
