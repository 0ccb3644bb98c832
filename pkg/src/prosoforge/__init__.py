"""Prosody conversion, mel/vocoder pipelines and speech-quality metrics."""

from .errors import ComputationError, FormatError, ProsoforgeError, UnsupportedFormatError, ValidationError
from .signal_core import AudioBuffer, FrameSpec, istft, read_wav, resample, stft, write_wav

__version__ = "0.1.0"
