"""Spectrogram-to-waveform synthesis: Griffin-Lim and a forward-only GAN vocoder."""

from .griffinlim import GriffinLimResult, griffin_lim, mel_pseudo_inverse, spectral_convergence
from .losses import LossReport, gan_losses
from .models import (
    DiscriminatorConfig,
    GeneratorConfig,
    discriminator_forward,
    generator_forward,
    init_weights,
    load_config,
)
from .spsa import spsa_step, spsa_train, spsa_train_step
from .weights import WeightStore

# small enough (about 1.3k parameters) for SPSA demos
TOY_GENERATOR = GeneratorConfig(n_mels=8, base_channels=8, upsample_factors=(8, 8, 2, 2), upsample_kernels=(16, 16, 4, 4))

__all__ = [
    "GeneratorConfig", "DiscriminatorConfig", "WeightStore", "init_weights", "load_config",
    "generator_forward", "discriminator_forward", "LossReport", "gan_losses",
    "mel_pseudo_inverse", "griffin_lim", "spectral_convergence", "GriffinLimResult",
    "spsa_step", "spsa_train_step", "spsa_train", "TOY_GENERATOR",
]
