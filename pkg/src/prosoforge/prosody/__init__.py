"""Pitch tracking, segmentation and read-to-conversational prosody transformation."""

from .contour import transform_contour
from .convert import apply_emphasis, convert
from .pitch import PitchContour, track_pitch
from .profile import PRESETS, FinalContour, ProsodyProfile, load_profile
from .segments import PAUSE, SPEECH, Segment, SegmentMap, detect_segments
from .tsm import shift_pitch, time_stretch

__all__ = [
    "PitchContour", "track_pitch", "Segment", "SegmentMap", "detect_segments", "SPEECH", "PAUSE",
    "FinalContour", "ProsodyProfile", "PRESETS", "load_profile", "transform_contour",
    "time_stretch", "shift_pitch", "apply_emphasis", "convert",
]
