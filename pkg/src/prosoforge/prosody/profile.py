"""Declarative prosody profiles and their JSON form."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Union

from ..errors import ValidationError

FINAL_KINDS = ("none", "rise", "fall")


@dataclass(frozen=True)
class FinalContour:
    kind: str = "none"
    extent_semitones: float = 0.0
    tail_fraction: float = 0.2

    def __post_init__(self):
        if self.kind not in FINAL_KINDS:
            raise ValidationError(f"final contour kind must be one of {FINAL_KINDS}")
        if self.extent_semitones < 0:
            raise ValidationError("extent_semitones must be >= 0")
        if not 0.0 < self.tail_fraction <= 1.0:
            raise ValidationError("tail_fraction must lie in (0, 1]")


@dataclass(frozen=True)
class ProsodyProfile:
    name: str = "neutral"
    pitch_shift_semitones: float = 0.0
    pitch_range_scale: float = 1.0
    final_contour: FinalContour = field(default_factory=FinalContour)
    tempo: float = 1.0
    pause_scale: float = 1.0
    emphasis_gain_db: float = 0.0
    emphasis_top_fraction: float = 0.0

    def __post_init__(self):
        if isinstance(self.final_contour, dict):
            object.__setattr__(self, "final_contour", FinalContour(**self.final_contour))
        if not 0.5 <= self.tempo <= 2.0:
            raise ValidationError(f"tempo must lie in [0.5, 2.0], got {self.tempo}")
        if not 0.25 <= self.pitch_range_scale <= 4.0:
            raise ValidationError(f"pitch_range_scale must lie in [0.25, 4.0], got {self.pitch_range_scale}")
        if not 0.25 <= self.pause_scale <= 4.0:
            raise ValidationError(f"pause_scale must lie in [0.25, 4.0], got {self.pause_scale}")
        if not 0.0 <= self.emphasis_gain_db <= 12.0:
            raise ValidationError(f"emphasis_gain_db must lie in [0, 12], got {self.emphasis_gain_db}")
        if not 0.0 <= self.emphasis_top_fraction <= 1.0:
            raise ValidationError("emphasis_top_fraction must lie in [0, 1]")

    def with_overrides(self, **changes) -> "ProsodyProfile":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: dict) -> "ProsodyProfile":
        known = set(cls.__dataclass_fields__)
        unknown = set(doc) - known
        if unknown:
            raise ValidationError(f"unknown profile fields: {sorted(unknown)}")
        doc = dict(doc)
        if "final_contour" in doc:
            fc = doc["final_contour"] or {}
            if "kind" in fc and fc["kind"] is None:
                fc = {**fc, "kind": "none"}
            doc["final_contour"] = FinalContour(**fc)
        return cls(**doc)


PRESETS = {
    "neutral": ProsodyProfile(),
    "conversational-casual": ProsodyProfile(
        name="conversational-casual",
        pitch_range_scale=1.3,
        tempo=1.05,
        pause_scale=1.4,
        final_contour=FinalContour("fall", 2.0, 0.2),
        emphasis_gain_db=2.0,
        emphasis_top_fraction=0.1,
    ),
    "conversational-expressive": ProsodyProfile(
        name="conversational-expressive",
        pitch_range_scale=1.6,
        pause_scale=1.2,
        final_contour=FinalContour("rise", 3.0, 0.1),
        emphasis_gain_db=4.0,
        emphasis_top_fraction=0.2,
    ),
}


def load_profile(name_or_path: Union[str, Path]) -> ProsodyProfile:
    """Resolve a preset name or a JSON profile file."""
    key = str(name_or_path)
    if key in PRESETS:
        return PRESETS[key]
    path = Path(name_or_path)
    if not path.exists():
        raise ValidationError(f"no preset or profile file named {key!r}; presets: {sorted(PRESETS)}")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise ValidationError(f"{path}: profile must be a JSON object")
    return ProsodyProfile.from_dict(doc)
