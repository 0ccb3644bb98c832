"""Minimal numpy convolution layers for forward-only inference."""

import numpy as np

LRELU_SLOPE = 0.1


def leaky_relu(x, slope=LRELU_SLOPE):
    return np.where(x >= 0, x, slope * x)


def conv1d(x, weight, bias=None, stride=1, padding=0, dilation=1):
    """Cross-correlation of ``x`` (B, C_in, L) with ``weight`` (C_out, C_in, K)."""
    _, c_in, _ = x.shape
    c_out, w_in, k = weight.shape
    if w_in != c_in:
        raise ValueError(f"conv1d expects {w_in} input channels, got {c_in}")
    if padding:
        x = np.pad(x, ((0, 0), (0, 0), (padding, padding)))
    span = (k - 1) * dilation + 1
    if x.shape[2] < span:
        return np.zeros((x.shape[0], c_out, 0))
    windows = np.lib.stride_tricks.sliding_window_view(x, span, axis=2)[:, :, ::stride, ::dilation]
    out = np.einsum("bclk,ock->bol", windows, weight, optimize=True)
    if bias is not None:
        out = out + bias[None, :, None]
    return out


def conv_transpose1d(x, weight, bias=None, stride=1, padding=0):
    """Transposed convolution with ``weight`` laid out (C_in, C_out, K).

    Output length is ``(L - 1) * stride - 2 * padding + K``.
    """
    batch, c_in, length = x.shape
    w_in, c_out, k = weight.shape
    if w_in != c_in:
        raise ValueError(f"conv_transpose1d expects {w_in} input channels, got {c_in}")
    full = (length - 1) * stride + k
    out = np.zeros((batch, c_out, full))
    for tap in range(k):
        contrib = np.einsum("bci,co->boi", x, weight[:, :, tap], optimize=True)
        out[:, :, tap: tap + (length - 1) * stride + 1: stride] += contrib
    out = out[:, :, padding: full - padding]
    if bias is not None:
        out = out + bias[None, :, None]
    return out


def avg_pool1d(x, factor):
    if factor == 1:
        return x
    usable = x.shape[-1] // factor * factor
    return x[..., :usable].reshape(*x.shape[:-1], -1, factor).mean(axis=-1)
