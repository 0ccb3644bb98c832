"""Generator and multi-resolution discriminator forward passes."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import List, Tuple, Union

import numpy as np

from ..errors import ValidationError
from ..melspec import MelSpectrogram
from ..signal_core import AudioBuffer
from .nn import avg_pool1d, conv1d, conv_transpose1d, leaky_relu
from .weights import ParamSpec, WeightStore, init_from_specs

PRE_KERNEL = 7
POST_KERNEL = 7


@dataclass(frozen=True)
class GeneratorConfig:
    n_mels: int = 80
    base_channels: int = 32
    upsample_factors: Tuple[int, ...] = (8, 8, 2, 2)
    upsample_kernels: Tuple[int, ...] = ()
    resblock_kernel: int = 3
    resblock_dilations: Tuple[int, ...] = (1, 3)

    def __post_init__(self):
        factors = tuple(int(f) for f in self.upsample_factors)
        kernels = tuple(int(k) for k in self.upsample_kernels) or tuple(2 * f for f in factors)
        object.__setattr__(self, "upsample_factors", factors)
        object.__setattr__(self, "upsample_kernels", kernels)
        object.__setattr__(self, "resblock_dilations", tuple(int(d) for d in self.resblock_dilations))
        if self.n_mels < 1 or self.base_channels < 1:
            raise ValidationError("n_mels and base_channels must be positive")
        if len(kernels) != len(factors) or not factors:
            raise ValidationError("need one upsample kernel per upsample factor")
        for f, k in zip(factors, kernels):
            if f < 1 or k < f or (k - f) % 2:
                raise ValidationError(f"upsample kernel {k} invalid for factor {f}: need k >= f and k - f even")
        if self.resblock_kernel < 1 or self.resblock_kernel % 2 == 0:
            raise ValidationError("resblock_kernel must be odd")

    @property
    def hop(self) -> int:
        return int(np.prod(self.upsample_factors))

    def channels(self) -> List[int]:
        """Channel count at the input of each stage plus the final stage output."""
        return [max(1, self.base_channels >> i) for i in range(len(self.upsample_factors) + 1)]

    def param_specs(self) -> List[ParamSpec]:
        ch = self.channels()
        specs = [
            ParamSpec("conv_pre.weight", (ch[0], self.n_mels, PRE_KERNEL), self.n_mels * PRE_KERNEL, ch[0] * PRE_KERNEL),
            ParamSpec("conv_pre.bias", (ch[0],), is_bias=True),
        ]
        rk = self.resblock_kernel
        for i, k in enumerate(self.upsample_kernels):
            c_in, c_out = ch[i], ch[i + 1]
            specs.append(ParamSpec(f"ups.{i}.weight", (c_in, c_out, k), c_in * k, c_out * k))
            specs.append(ParamSpec(f"ups.{i}.bias", (c_out,), is_bias=True))
            for j, _ in enumerate(self.resblock_dilations):
                specs.append(ParamSpec(f"res.{i}.{j}.weight", (c_out, c_out, rk), c_out * rk, c_out * rk))
                specs.append(ParamSpec(f"res.{i}.{j}.bias", (c_out,), is_bias=True))
        specs.append(ParamSpec("conv_post.weight", (1, ch[-1], POST_KERNEL), ch[-1] * POST_KERNEL, POST_KERNEL))
        specs.append(ParamSpec("conv_post.bias", (1,), is_bias=True))
        return specs

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class DiscriminatorConfig:
    scale_factors: Tuple[int, ...] = (1, 2, 4)
    periods: Tuple[int, ...] = (2, 3)
    channels: Tuple[int, ...] = (8, 16)

    def __post_init__(self):
        for name in ("scale_factors", "periods", "channels"):
            object.__setattr__(self, name, tuple(int(v) for v in getattr(self, name)))
        s = self.scale_factors
        if not s or s[0] != 1 or any(b <= a for a, b in zip(s, s[1:])):
            raise ValidationError("scale_factors must start at 1 and be strictly increasing")
        if any(p < 2 for p in self.periods) or len(set(self.periods)) != len(self.periods):
            raise ValidationError("periods must be distinct and >= 2")
        if len(self.channels) != 2 or min(self.channels) < 1:
            raise ValidationError("channels must be two positive widths")

    # (c_in, c_out, kernel, stride) per conv layer, then the score layer
    def scale_layers(self) -> List[Tuple[int, int, int, int]]:
        c1, c2 = self.channels
        return [(1, c1, 15, 1), (c1, c2, 15, 4), (c2, c2, 15, 4), (c2, c2, 5, 1), (c2, 1, 3, 1)]

    def period_layers(self) -> List[Tuple[int, int, int, int]]:
        c1, c2 = self.channels
        return [(1, c1, 5, 3), (c1, c2, 5, 3), (c2, c2, 5, 1), (c2, 1, 3, 1)]

    def sub_networks(self) -> List[Tuple[str, int, List[Tuple[int, int, int, int]]]]:
        nets = [(f"msd.{s}", s, self.scale_layers()) for s in self.scale_factors]
        nets += [(f"mpd.{p}", p, self.period_layers()) for p in self.periods]
        return nets

    def param_specs(self) -> List[ParamSpec]:
        specs = []
        for prefix, _, layers in self.sub_networks():
            for i, (c_in, c_out, k, _) in enumerate(layers):
                specs.append(ParamSpec(f"{prefix}.{i}.weight", (c_out, c_in, k), c_in * k, c_out * k))
                specs.append(ParamSpec(f"{prefix}.{i}.bias", (c_out,), is_bias=True))
        return specs

    def to_dict(self) -> dict:
        return asdict(self)


def load_config(path: Union[str, Path]):
    """Read a generator or discriminator config from JSON (``{"kind": ..., ...}``)."""
    doc = json.loads(Path(path).read_text())
    kind = doc.pop("kind", "generator")
    cls = {"generator": GeneratorConfig, "discriminator": DiscriminatorConfig}.get(kind)
    if cls is None:
        raise ValidationError(f"unknown config kind {kind!r}")
    try:
        return cls(**doc)
    except TypeError as exc:
        raise ValidationError(str(exc)) from exc


def init_weights(config, seed: int) -> WeightStore:
    return init_from_specs(config.param_specs(), seed)


def generator_forward(
    mel: Union[MelSpectrogram, np.ndarray],
    config: GeneratorConfig,
    weights: WeightStore,
    sample_rate_hz: int = 16000,
) -> AudioBuffer:
    """Mel frames to waveform; output length is exactly ``frames * hop``."""
    values = mel.values if isinstance(mel, MelSpectrogram) else np.asarray(mel, dtype=np.float64)
    if isinstance(mel, MelSpectrogram):
        sample_rate_hz = mel.sample_rate_hz
    if values.ndim != 2 or values.shape[1] != config.n_mels:
        raise ValidationError(f"generator expects frames x {config.n_mels} mel input, got {values.shape}")
    weights.check(config.param_specs())

    x = values.T[None, :, :]
    x = conv1d(x, weights.get("conv_pre.weight"), weights.get("conv_pre.bias"), padding=PRE_KERNEL // 2)
    rk = config.resblock_kernel
    for i, (f, k) in enumerate(zip(config.upsample_factors, config.upsample_kernels)):
        x = conv_transpose1d(x, weights.get(f"ups.{i}.weight"), weights.get(f"ups.{i}.bias"), stride=f, padding=(k - f) // 2)
        x = leaky_relu(x)
        for j, d in enumerate(config.resblock_dilations):
            h = conv1d(
                leaky_relu(x),
                weights.get(f"res.{i}.{j}.weight"),
                weights.get(f"res.{i}.{j}.bias"),
                padding=d * (rk - 1) // 2,
                dilation=d,
            )
            x = x + h
    x = conv1d(x, weights.get("conv_post.weight"), weights.get("conv_post.bias"), padding=POST_KERNEL // 2)
    return AudioBuffer(np.tanh(x[0, 0]), sample_rate_hz)


def _conv_stack(x, prefix, layers, weights):
    """Run one sub-network on (B, 1, L); return the score map and hidden activations."""
    feats = []
    last = len(layers) - 1
    for i, (_, _, k, stride) in enumerate(layers):
        x = conv1d(x, weights.get(f"{prefix}.{i}.weight"), weights.get(f"{prefix}.{i}.bias"), stride=stride, padding=k // 2)
        if i < last:
            x = leaky_relu(x)
            feats.append(x)
    return x, feats


def discriminator_forward(
    audio: Union[AudioBuffer, np.ndarray],
    config: DiscriminatorConfig,
    weights: WeightStore,
) -> List[Tuple[np.ndarray, List[np.ndarray]]]:
    """Score ``audio`` with every sub-network.

    Returns one ``(score_map, feature_maps)`` pair per scale factor followed by
    one per period. Scale sub-networks see the signal average-pooled by their
    factor; period sub-networks fold it into ``period`` interleaved columns
    (zero-padded to a whole number of periods) and convolve along each column.
    """
    x = audio.samples if isinstance(audio, AudioBuffer) else np.asarray(audio, dtype=np.float64)
    if x.ndim != 1 or x.size == 0:
        raise ValidationError("discriminator expects a non-empty 1-D signal")
    weights.check(config.param_specs())

    outputs = []
    for prefix, factor, layers in config.sub_networks():
        if prefix.startswith("msd."):
            pooled = avg_pool1d(x, factor)
            score, feats = _conv_stack(pooled[None, None, :], prefix, layers, weights)
            outputs.append((score[0, 0], [f[0] for f in feats]))
        else:
            period = factor
            padded = np.pad(x, (0, (-x.size) % period))
            # column c holds samples c, c + p, c + 2p, ...
            cols = padded.reshape(-1, period).T[:, None, :]
            score, feats = _conv_stack(cols, prefix, layers, weights)
            outputs.append((score[:, 0, :].T, [f.transpose(1, 2, 0) for f in feats]))
    return outputs
