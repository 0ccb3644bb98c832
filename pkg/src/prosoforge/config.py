"""Run configuration shared by the CLI commands."""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Optional

from .errors import ValidationError
from .melspec import build_mel_filterbank
from .metrics import MCD_CONVENTIONAL, MCD_PAPER, EvalConfig
from .prosody.profile import load_profile
from .signal_core import MIN_SAMPLE_RATE, FrameSpec

ENV_VAR = "PROSOFORGE_CONFIG"
VOCODERS = ("griffinlim", "gan")


@dataclass(frozen=True)
class RunConfig:
    sample_rate_hz: int = 16000
    n_fft: int = 1024
    hop: int = 256
    window: str = "hann_periodic"
    n_mels: int = 80
    fmin_hz: float = 0.0
    fmax_hz: Optional[float] = None
    f0_min_hz: float = 50.0
    f0_max_hz: float = 500.0
    profile: str = "neutral"
    mcd_mode: str = MCD_PAPER
    n_mfcc: int = 13
    allow_truncate: bool = False
    vocoder: str = "griffinlim"
    griffin_lim_iters: int = 60
    seed: int = 0
    # training grid kept for reference; the toy trainer uses only learning_rate
    epochs: int = 20
    batch_size: int = 16
    learning_rate: float = 5e-5
    dropout: float = 0.1

    def validate(self) -> "RunConfig":
        """Check every field against the owning module's constraints."""
        if self.sample_rate_hz < MIN_SAMPLE_RATE:
            raise ValidationError(f"sample_rate_hz must be >= {MIN_SAMPLE_RATE}")
        spec = self.frame_spec
        build_mel_filterbank(self.sample_rate_hz, self.n_fft, self.n_mels, self.fmin_hz, self.fmax_hz)
        if not 1 <= self.n_mfcc <= self.n_mels - 1:
            raise ValidationError(f"n_mfcc must lie in [1, {self.n_mels - 1}]")
        if not 0 < self.f0_min_hz < self.f0_max_hz:
            raise ValidationError("need 0 < f0_min_hz < f0_max_hz")
        if self.sample_rate_hz < 8 * self.f0_max_hz:
            raise ValidationError("sample rate too low for f0_max_hz")
        if self.mcd_mode not in (MCD_PAPER, MCD_CONVENTIONAL):
            raise ValidationError(f"mcd_mode must be {MCD_PAPER!r} or {MCD_CONVENTIONAL!r}")
        if self.vocoder not in VOCODERS:
            raise ValidationError(f"vocoder must be one of {VOCODERS}")
        if self.griffin_lim_iters < 0:
            raise ValidationError("griffin_lim_iters must be >= 0")
        if self.seed < 0:
            raise ValidationError("seed must be non-negative")
        if self.learning_rate <= 0:
            raise ValidationError("learning_rate must be positive")
        spec.check_cola()
        load_profile(self.profile)
        return self

    @property
    def frame_spec(self) -> FrameSpec:
        return FrameSpec(self.n_fft, self.hop, self.window)

    @property
    def f0_range(self):
        return (self.f0_min_hz, self.f0_max_hz)

    def eval_config(self) -> EvalConfig:
        return EvalConfig(
            n_fft=self.n_fft,
            hop=self.hop,
            window=self.window,
            n_mels=self.n_mels,
            fmin_hz=self.fmin_hz,
            fmax_hz=self.fmax_hz,
            n_mfcc=self.n_mfcc,
            mcd_mode=self.mcd_mode,
            f0_min_hz=self.f0_min_hz,
            f0_max_hz=self.f0_max_hz,
            allow_truncate=self.allow_truncate,
        )

    def to_dict(self) -> dict:
        return asdict(self)


def load_run_config(path: Optional[str] = None, overrides: Optional[dict] = None) -> RunConfig:
    """Defaults, then the JSON file (``path`` or ``$PROSOFORGE_CONFIG``), then ``overrides``."""
    values = {}
    path = path or os.environ.get(ENV_VAR)
    if path:
        try:
            doc = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: invalid JSON ({exc})") from exc
        if not isinstance(doc, dict):
            raise ValidationError(f"{path}: config must be a JSON object")
        values.update(doc)
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    known = {f.name for f in fields(RunConfig)}
    unknown = sorted(set(values) - known)
    if unknown:
        raise ValidationError(f"unknown config keys: {unknown}")
    try:
        cfg = RunConfig(**values)
    except TypeError as exc:
        raise ValidationError(str(exc)) from exc
    return cfg.validate()
