"""Gradient-free training with simultaneous perturbation (SPSA)."""

from __future__ import annotations

from typing import Callable, List, Sequence, Tuple

import numpy as np

from ..errors import ComputationError, ValidationError
from ..melspec import MelFilterbank, MelSpectrogram
from ..signal_core import AudioBuffer, FrameSpec
from .losses import mel_l1
from .models import GeneratorConfig, generator_forward
from .rng import rademacher
from .weights import WeightStore

DEFAULT_STEP = 5e-5
DEFAULT_PERTURBATION = 1e-2


def spsa_step(
    loss: Callable[[np.ndarray], float],
    theta: np.ndarray,
    a: float,
    c: float,
    seed: int,
) -> Tuple[np.ndarray, float]:
    """One SPSA update of ``theta``; returns the new point and ``loss(theta)``.

    The direction is a Rademacher vector drawn from ``seed`` and the update is
    ``theta - a * g * delta`` with ``g = (L(theta + c delta) - L(theta - c delta)) / 2c``.
    """
    if a < 0 or c <= 0:
        raise ValidationError(f"need a >= 0 and c > 0, got a={a}, c={c}")
    theta = np.asarray(theta, dtype=np.float64)
    delta = rademacher(seed, theta.size).reshape(theta.shape)
    base = loss(theta)
    plus = loss(theta + c * delta)
    minus = loss(theta - c * delta)
    if not np.all(np.isfinite([base, plus, minus])):
        raise ComputationError(
            f"non-finite SPSA loss (L={base}, L+={plus}, L-={minus}) at seed {seed}, "
            f"|theta|_max={np.max(np.abs(theta)):.3g}"
        )
    if a == 0:
        return theta.copy(), float(base)
    g = (plus - minus) / (2.0 * c)
    return theta - a * g * delta, float(base)


def generator_loss_fn(
    weights: WeightStore,
    config: GeneratorConfig,
    mel_batch: Sequence[MelSpectrogram],
    target_batch: Sequence[AudioBuffer],
    spec: FrameSpec,
    bank: MelFilterbank,
) -> Callable[[np.ndarray], float]:
    """Mean mel reconstruction loss of the generator over a batch, as a function of flat weights.

    Generator output (``frames * hop`` samples) is trimmed to the target length.
    """
    if len(mel_batch) != len(target_batch) or not mel_batch:
        raise ValidationError("mel and target batches must be non-empty and equal in size")

    def loss(flat: np.ndarray) -> float:
        store = weights.from_flat(flat)
        total = 0.0
        for mel, target in zip(mel_batch, target_batch):
            audio = generator_forward(mel, config, store)
            fake = audio.with_samples(audio.samples[: len(target)])
            total += mel_l1(target, fake, spec, bank)
        return total / len(mel_batch)

    return loss


def spsa_train_step(
    weights: WeightStore,
    mel_batch: Sequence[MelSpectrogram],
    target_batch: Sequence[AudioBuffer],
    config: GeneratorConfig,
    spec: FrameSpec,
    bank: MelFilterbank,
    a: float = DEFAULT_STEP,
    c: float = DEFAULT_PERTURBATION,
    seed: int = 0,
) -> Tuple[WeightStore, float]:
    loss = generator_loss_fn(weights, config, mel_batch, target_batch, spec, bank)
    theta, value = spsa_step(loss, weights.flat(), a, c, seed)
    return weights.from_flat(theta), value


def spsa_train(
    weights: WeightStore,
    mel_batch: Sequence[MelSpectrogram],
    target_batch: Sequence[AudioBuffer],
    config: GeneratorConfig,
    spec: FrameSpec,
    bank: MelFilterbank,
    steps: int,
    a: float = DEFAULT_STEP,
    c: float = DEFAULT_PERTURBATION,
    seed: int = 0,
) -> Tuple[WeightStore, List[float]]:
    """Run ``steps`` SPSA updates; step ``i`` draws its direction from ``seed + i``."""
    losses = []
    for i in range(steps):
        weights, value = spsa_train_step(weights, mel_batch, target_batch, config, spec, bank, a, c, seed + i)
        losses.append(value)
    return weights, losses
