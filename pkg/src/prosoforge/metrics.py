"""Objective distortion measures, MOS aggregation and pairwise evaluation reports."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import ComputationError, ProsoforgeError, ValidationError
from .melspec import MfccMatrix, build_mel_filterbank, mel_spectrogram, mfcc
from .prosody.pitch import DEFAULT_F0_RANGE, PitchContour, track_pitch
from .signal_core import AudioBuffer, FrameSpec, read_wav, resample

MCD_PAPER = "paper"
MCD_CONVENTIONAL = "conventional"
MCD_CONSTANT = 10.0 * math.log(10.0) / math.sqrt(2.0)


def mcd(ref: MfccMatrix, syn: MfccMatrix, mode: str = MCD_PAPER) -> float:
    """Mel-cepstral distortion over frames aligned by truncation.

    ``paper`` mode: ``10 ln10 / sqrt(2) * sqrt(sum_t sum_k (c - c_hat)^2)`` with
    no per-frame averaging. ``conventional`` mode: the frame-averaged dB form
    ``10 / ln10 * mean_t sqrt(2 * sum_k (c - c_hat)^2)``.
    """
    a = ref.values if isinstance(ref, MfccMatrix) else np.asarray(ref, dtype=np.float64)
    b = syn.values if isinstance(syn, MfccMatrix) else np.asarray(syn, dtype=np.float64)
    if a.shape[1] != b.shape[1]:
        raise ValidationError(f"coefficient counts differ ({a.shape[1]} vs {b.shape[1]})")
    n = min(a.shape[0], b.shape[0])
    if n < 1:
        raise ValidationError("MCD needs at least one frame in each matrix")
    sq = (a[:n] - b[:n]) ** 2
    if mode == MCD_PAPER:
        return float(MCD_CONSTANT * math.sqrt(float(sq.sum())))
    if mode == MCD_CONVENTIONAL:
        return float(10.0 / math.log(10.0) * np.mean(np.sqrt(2.0 * sq.sum(axis=1))))
    raise ValidationError(f"unknown MCD mode {mode!r}")


def pcd(ref: PitchContour, syn: PitchContour) -> Tuple[float, int]:
    """Mean squared f0 difference (Hz^2) over frames voiced in both contours.

    Returns the distortion and the number of frames compared.
    """
    if not math.isclose(ref.hop_s, syn.hop_s, rel_tol=1e-9):
        raise ValidationError(f"contour hops differ ({ref.hop_s} vs {syn.hop_s})")
    n = min(len(ref), len(syn))
    both = ref.voiced[:n] & syn.voiced[:n]
    count = int(both.sum())
    if count == 0:
        raise ComputationError("no comparable voiced frames")
    diff = ref.f0_hz[:n][both] - syn.f0_hz[:n][both]
    return float(np.mean(diff**2)), count


def rmse(ref: AudioBuffer, syn: AudioBuffer, allow_truncate: bool = False) -> float:
    if ref.sample_rate_hz != syn.sample_rate_hz:
        raise ValidationError(f"sample rates differ ({ref.sample_rate_hz} vs {syn.sample_rate_hz})")
    if len(ref) != len(syn) and not allow_truncate:
        raise ValidationError(f"lengths differ ({len(ref)} vs {len(syn)}); enable truncation to compare")
    n = min(len(ref), len(syn))
    if n == 0:
        raise ValidationError("RMSE needs at least one sample")
    d = ref.samples[:n] - syn.samples[:n]
    return float(np.sqrt(np.mean(d * d)))


# ---------------------------------------------------------------------------
# MOS
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Rating:
    listener_id: str
    sample_id: str
    rating: float


@dataclass
class RatingsTable:
    rows: List[Rating]
    scale_min: float = 1.0
    scale_max: float = 5.0

    def __post_init__(self):
        seen = set()
        for i, r in enumerate(self.rows):
            if not math.isfinite(r.rating) or not self.scale_min <= r.rating <= self.scale_max:
                raise ValidationError(
                    f"row {i + 1} ({r.listener_id}, {r.sample_id}): rating {r.rating} outside "
                    f"[{self.scale_min}, {self.scale_max}]"
                )
            key = (r.listener_id, r.sample_id)
            if key in seen:
                raise ValidationError(f"row {i + 1}: duplicate rating for listener {key[0]!r}, sample {key[1]!r}")
            seen.add(key)

    @classmethod
    def from_csv(cls, path: Union[str, Path], scale_min: float = 1.0, scale_max: float = 5.0) -> "RatingsTable":
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            needed = {"listener_id", "sample_id", "rating"}
            if reader.fieldnames is None or not needed <= set(reader.fieldnames):
                raise ValidationError(f"{path}: header must contain listener_id,sample_id,rating")
            rows = []
            for line, rec in enumerate(reader, start=2):
                try:
                    value = float(rec["rating"])
                except (TypeError, ValueError) as exc:
                    raise ValidationError(f"{path}:{line}: rating {rec['rating']!r} is not a number") from exc
                rows.append(Rating(rec["listener_id"], rec["sample_id"], value))
        return cls(rows, scale_min, scale_max)


@dataclass(frozen=True)
class MosSummary:
    mos: float
    ci95: float
    n: int
    per_sample: Dict[str, float]

    def to_dict(self) -> dict:
        return asdict(self)


def mos_aggregate(table: RatingsTable) -> MosSummary:
    """Mean rating with a normal-approximation 95% interval half-width."""
    values = np.array([r.rating for r in table.rows], dtype=np.float64)
    n = values.size
    if n == 0:
        raise ValidationError("MOS needs at least one rating")
    mos = float(values.sum() / n)
    sd = float(np.std(values, ddof=1)) if n > 1 else 0.0
    per: Dict[str, List[float]] = {}
    for r in table.rows:
        per.setdefault(r.sample_id, []).append(r.rating)
    per_sample = {k: float(sum(v) / len(v)) for k, v in sorted(per.items())}
    return MosSummary(mos, 1.96 * sd / math.sqrt(n), n, per_sample)


# ---------------------------------------------------------------------------
# Pairwise evaluation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EvalConfig:
    n_fft: int = 1024
    hop: int = 256
    window: str = "hann_periodic"
    n_mels: int = 80
    fmin_hz: float = 0.0
    fmax_hz: Optional[float] = None
    n_mfcc: int = 13
    mcd_mode: str = MCD_PAPER
    f0_min_hz: float = DEFAULT_F0_RANGE[0]
    f0_max_hz: float = DEFAULT_F0_RANGE[1]
    allow_truncate: bool = False

    def __post_init__(self):
        if self.mcd_mode not in (MCD_PAPER, MCD_CONVENTIONAL):
            raise ValidationError(f"mcd_mode must be {MCD_PAPER!r} or {MCD_CONVENTIONAL!r}")
        FrameSpec(self.n_fft, self.hop, self.window)

    @property
    def frame_spec(self) -> FrameSpec:
        return FrameSpec(self.n_fft, self.hop, self.window)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class MetricReport:
    ref: str
    syn: str
    mcd: float
    mcd_mode: str
    pcd: Optional[float]
    pcd_skip_reason: Optional[str]
    frames_compared: int
    rmse: Optional[float]
    voiced_fraction_ref: float
    voiced_fraction_syn: float
    pesq_external: Optional[float] = None
    config: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


REPORT_KEYS = tuple(MetricReport.__dataclass_fields__)


class StageError(ProsoforgeError):
    """An evaluation stage failed; ``stage`` names it."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause


def evaluate_buffers(
    ref: AudioBuffer,
    syn: AudioBuffer,
    config: EvalConfig = EvalConfig(),
    ref_name: str = "",
    syn_name: str = "",
    pesq_external: Optional[float] = None,
) -> MetricReport:
    """Compare two signals; ``syn`` is resampled to the reference rate first."""
    if syn.sample_rate_hz != ref.sample_rate_hz:
        syn = resample(syn, ref.sample_rate_hz)
    spec = config.frame_spec
    sr = ref.sample_rate_hz
    try:
        bank = build_mel_filterbank(sr, config.n_fft, config.n_mels, config.fmin_hz, config.fmax_hz)
        c_ref = mfcc(mel_spectrogram(ref, spec, bank), config.n_mfcc)
        c_syn = mfcc(mel_spectrogram(syn, spec, bank), config.n_mfcc)
        mcd_value = mcd(c_ref, c_syn, config.mcd_mode)
    except ProsoforgeError as exc:
        raise StageError("mcd", exc) from exc

    f0_range = (config.f0_min_hz, config.f0_max_hz)
    try:
        p_ref = track_pitch(ref, f0_range, spec)
        p_syn = track_pitch(syn, f0_range, spec)
    except ProsoforgeError as exc:
        raise StageError("pitch", exc) from exc
    try:
        pcd_value, frames = pcd(p_ref, p_syn)
        skip = None
    except ComputationError as exc:
        pcd_value, frames, skip = None, 0, str(exc)

    rmse_value = None
    if len(ref) == len(syn) or config.allow_truncate:
        rmse_value = rmse(ref, syn, allow_truncate=config.allow_truncate)

    return MetricReport(
        ref=ref_name,
        syn=syn_name,
        mcd=mcd_value,
        mcd_mode=config.mcd_mode,
        pcd=pcd_value,
        pcd_skip_reason=skip,
        frames_compared=frames,
        rmse=rmse_value,
        voiced_fraction_ref=p_ref.voiced_fraction,
        voiced_fraction_syn=p_syn.voiced_fraction,
        pesq_external=pesq_external,
        config=config.to_dict(),
    )


def evaluate_pair(
    ref_path: Union[str, Path],
    syn_path: Union[str, Path],
    config: EvalConfig = EvalConfig(),
    pesq_external: Optional[float] = None,
) -> MetricReport:
    try:
        ref = read_wav(ref_path)
        syn = read_wav(syn_path)
    except (OSError, ProsoforgeError) as exc:
        raise StageError("read", exc) from exc
    return evaluate_buffers(ref, syn, config, str(ref_path), str(syn_path), pesq_external)


def evaluate_pairs(
    pairs: Sequence[Tuple[str, str]],
    config: EvalConfig = EvalConfig(),
    workers: int = 1,
) -> List[MetricReport]:
    """Evaluate many pairs, optionally in a process pool; output keeps input order."""
    if workers <= 1:
        return [evaluate_pair(r, s, config) for r, s in pairs]
    from concurrent.futures import ProcessPoolExecutor

    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(evaluate_pair, r, s, config) for r, s in pairs]
        return [f.result() for f in futures]
