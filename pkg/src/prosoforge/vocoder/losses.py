"""Least-squares GAN, feature-matching and mel reconstruction losses."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import List, Sequence, Tuple

import numpy as np

from ..errors import ValidationError
from ..melspec import MelFilterbank, mel_spectrogram
from ..signal_core import AudioBuffer, FrameSpec

LAMBDA_FM = 2.0
LAMBDA_MEL = 45.0

DiscOutputs = Sequence[Tuple[np.ndarray, List[np.ndarray]]]


@dataclass(frozen=True)
class LossReport:
    adv_g: float
    adv_d: float
    feature_matching: float
    mel_reconstruction: float
    total_g: float

    def to_dict(self) -> dict:
        return asdict(self)


def mel_l1(real: AudioBuffer, fake: AudioBuffer, spec: FrameSpec, bank: MelFilterbank) -> float:
    """Mean absolute difference between the log-mel spectrograms of two signals."""
    a = mel_spectrogram(real, spec, bank).values
    b = mel_spectrogram(fake, spec, bank).values
    return float(np.mean(np.abs(a - b)))


def discriminator_loss(disc_real: DiscOutputs, disc_fake: DiscOutputs) -> float:
    return float(sum(np.mean((r - 1.0) ** 2) + np.mean(f**2) for (r, _), (f, _) in zip(disc_real, disc_fake)))


def generator_adversarial_loss(disc_fake: DiscOutputs) -> float:
    return float(sum(np.mean((f - 1.0) ** 2) for f, _ in disc_fake))


def feature_matching_loss(disc_real: DiscOutputs, disc_fake: DiscOutputs) -> float:
    total = 0.0
    for (_, feats_r), (_, feats_f) in zip(disc_real, disc_fake):
        for fr, ff in zip(feats_r, feats_f):
            total += float(np.mean(np.abs(fr - ff)))
    return total


def gan_losses(
    real: AudioBuffer,
    fake: AudioBuffer,
    disc_real: DiscOutputs,
    disc_fake: DiscOutputs,
    spec: FrameSpec,
    bank: MelFilterbank,
    lambda_fm: float = LAMBDA_FM,
    lambda_mel: float = LAMBDA_MEL,
) -> LossReport:
    if len(real) != len(fake):
        raise ValidationError(f"real and fake lengths differ ({len(real)} vs {len(fake)})")
    if len(disc_real) != len(disc_fake):
        raise ValidationError("real and fake discriminator outputs have different sub-network counts")
    adv_g = generator_adversarial_loss(disc_fake)
    adv_d = discriminator_loss(disc_real, disc_fake)
    fm = feature_matching_loss(disc_real, disc_fake)
    mel = mel_l1(real, fake, spec, bank)
    return LossReport(adv_g, adv_d, fm, mel, adv_g + lambda_fm * fm + lambda_mel * mel)
