"""Corpus manifests and pause-aware chunking."""

from __future__ import annotations

import fnmatch
import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import List, Sequence, Tuple, Union

import numpy as np

from .errors import FormatError, ValidationError
from .prosody.pitch import track_pitch
from .prosody.segments import PAUSE, detect_segments
from .signal_core import AudioBuffer, FrameSpec, read_wav

STYLES = ("read", "conversational", "unknown")
MANIFEST_KEYS = ("id", "path", "speaker", "text", "style", "duration_s", "sample_rate_hz")


@dataclass(frozen=True)
class ManifestEntry:
    id: str
    path: str
    speaker: str
    text: str
    style: str
    duration_s: float
    sample_rate_hz: int

    def __post_init__(self):
        if self.style not in STYLES:
            raise ValidationError(f"style must be one of {STYLES}, got {self.style!r}")
        if not self.duration_s > 0:
            raise ValidationError(f"entry {self.id!r}: duration must be positive")


@dataclass(frozen=True)
class StyleRule:
    glob: str
    style: str


@dataclass
class Manifest:
    entries: List[ManifestEntry]
    skipped: int = 0

    def __post_init__(self):
        ids = [e.id for e in self.entries]
        if len(set(ids)) != len(ids):
            raise ValidationError("manifest ids must be unique")

    def __len__(self) -> int:
        return len(self.entries)

    def to_jsonl(self) -> str:
        return "".join(json.dumps(asdict(e), sort_keys=False) + "\n" for e in self.entries)

    def save(self, path: Union[str, Path]) -> None:
        Path(path).write_text(self.to_jsonl())

    @classmethod
    def load(cls, path: Union[str, Path]) -> "Manifest":
        entries = []
        for n, line in enumerate(Path(path).read_text().splitlines(), start=1):
            if not line.strip():
                continue
            try:
                doc = json.loads(line)
            except json.JSONDecodeError as exc:
                raise FormatError(f"{path}:{n}: invalid JSON") from exc
            missing = set(MANIFEST_KEYS) - set(doc)
            if missing:
                raise FormatError(f"{path}:{n}: missing keys {sorted(missing)}")
            entries.append(ManifestEntry(**{k: doc[k] for k in MANIFEST_KEYS}))
        return cls(entries)


def load_style_rules(path: Union[str, Path]) -> List[StyleRule]:
    doc = json.loads(Path(path).read_text())
    if not isinstance(doc, list):
        raise ValidationError("style rules must be a JSON list of {glob, style} objects")
    rules = [StyleRule(r["glob"], r["style"]) for r in doc]
    for r in rules:
        if r.style not in STYLES:
            raise ValidationError(f"rule {r.glob!r}: unknown style {r.style!r}")
    return rules


def _style_for(rel: str, rules: Sequence[StyleRule]) -> str:
    for rule in rules:
        if fnmatch.fnmatch(rel, rule.glob):
            return rule.style
    return "unknown"


def ingest(root_dir: Union[str, Path], style_rules: Sequence[StyleRule] = ()) -> Manifest:
    """Collect every ``*.wav`` under ``root_dir`` into a manifest.

    Ids are the POSIX relative path without extension, so equal basenames in
    different folders stay distinct. The speaker is the top-level folder (empty
    for files at the root); a sibling ``<stem>.txt`` supplies the transcript.
    The first style rule whose glob matches the relative path wins. Every
    non-WAV file counts toward ``skipped``.
    """
    root = Path(root_dir)
    if not root.is_dir():
        raise OSError(f"cannot read corpus directory {root}")
    entries = []
    skipped = 0
    for path in sorted(p for p in root.rglob("*") if p.is_file()):
        rel = path.relative_to(root).as_posix()
        if path.suffix.lower() != ".wav":
            skipped += 1
            continue
        buf = read_wav(path)
        parts = Path(rel).parts
        transcript = path.with_suffix(".txt")
        entries.append(
            ManifestEntry(
                id=rel[: -len(path.suffix)],
                path=rel,
                speaker=parts[0] if len(parts) > 1 else "",
                text=transcript.read_text().strip() if transcript.exists() else "",
                style=_style_for(rel, style_rules),
                duration_s=round(len(buf) / buf.sample_rate_hz, 6),
                sample_rate_hz=buf.sample_rate_hz,
            )
        )
    return Manifest(entries, skipped)


@dataclass(frozen=True)
class Chunk:
    offset: int
    audio: AudioBuffer


def _pause_midpoints(buffer: AudioBuffer, spec: FrameSpec, min_pause_s: float, threshold_ratio: float) -> np.ndarray:
    contour = track_pitch(buffer, spec=spec)
    seg_map = detect_segments(contour, min_pause_s, threshold_ratio, 0.0)
    mids = [
        (s.start_frame + s.end_frame) * spec.hop // 2
        for s in seg_map.segments
        if s.kind == PAUSE and 0 < s.start_frame and s.end_frame < seg_map.n_frames
    ]
    return np.array(mids, dtype=np.int64)


def segment(
    buffer: AudioBuffer,
    max_len_s: float = 4.0,
    min_pause_s: float = 0.15,
    threshold_ratio: float = 0.1,
    tolerance: float = 0.2,
    spec: FrameSpec = FrameSpec(),
) -> List[Chunk]:
    """Cut ``buffer`` into chunks no longer than ``max_len_s``.

    Cuts follow a uniform grid of ``ceil(duration / max_len_s)`` chunks; a cut
    moves to the middle of a detected pause when one lies within
    ``tolerance`` of a grid step from its grid point and the move keeps both
    neighbouring chunks within the limit.
    """
    if max_len_s < 0.5:
        raise ValidationError("max_len_s must be >= 0.5")
    n = len(buffer)
    limit = int(math.floor(max_len_s * buffer.sample_rate_hz))
    if n <= limit:
        return [Chunk(0, buffer)]

    pauses = _pause_midpoints(buffer, spec, min_pause_s, threshold_ratio)
    cuts = [0]
    remaining_chunks = math.ceil(n / limit)
    while n - cuts[-1] > limit:
        start = cuts[-1]
        step = (n - start) / max(remaining_chunks, 1)
        grid = start + step
        cut = int(round(grid))
        if pauses.size:
            near = pauses[np.abs(pauses - grid) <= tolerance * step]
            near = near[(near - start <= limit) & (near > start)]
            # the rest must still fit in the remaining chunk budget
            near = near[(n - near) <= (remaining_chunks - 1) * limit]
            if near.size:
                cut = int(near[np.argmin(np.abs(near - grid))])
        cut = min(max(cut, start + 1), start + limit)
        cuts.append(cut)
        remaining_chunks -= 1
    cuts.append(n)
    x = buffer.samples
    return [Chunk(a, AudioBuffer(x[a:b].copy(), buffer.sample_rate_hz)) for a, b in zip(cuts[:-1], cuts[1:])]


def reassemble(chunks: Sequence[Chunk], n_samples: int) -> np.ndarray:
    out = np.zeros(n_samples)
    for c in chunks:
        out[c.offset: c.offset + len(c.audio)] = c.audio.samples
    return out
