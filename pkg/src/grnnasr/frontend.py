"""Short-time analysis: pre-emphasis, framing, Hamming window, power spectrum."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConfigInvalid, SegmentTooShort


@dataclass(frozen=True)
class FrontendConfig:
    """Frame geometry and filter settings. Durations are in seconds."""

    preemphasis_a: float = 0.9375
    frame_len: float = 0.025
    hop: float = 0.010
    fft_size: int = 256

    def __post_init__(self):
        if not 0.9 <= self.preemphasis_a <= 1.0:
            raise ConfigInvalid("preemphasis_a must lie in [0.9, 1.0]")
        if not 0 < self.hop < self.frame_len:
            raise ConfigInvalid("hop must lie in (0, frame_len)")
        if self.fft_size < 2 or self.fft_size & (self.fft_size - 1):
            raise ConfigInvalid("fft_size must be a power of two >= 2")

    def frame_samples(self, sample_rate: int) -> int:
        return int(round(self.frame_len * sample_rate))

    def hop_samples(self, sample_rate: int) -> int:
        return int(round(self.hop * sample_rate))


def preemphasize(samples: np.ndarray, a: float = 0.9375) -> np.ndarray:
    """First-order high-pass: y(n) = s(n) - a*s(n-1), with y(0) = s(0)."""
    x = np.asarray(samples, dtype=np.float64)
    if x.size == 0:
        raise ValueError("input is empty")
    y = np.empty_like(x)
    y[0] = x[0]
    y[1:] = x[1:] - a * x[:-1]
    return y


@lru_cache(maxsize=16)
def hamming_window(n: int) -> np.ndarray:
    """Symmetric Hamming window: 0.54 - 0.46*cos(2*pi*k/(n-1)).

    The returned array is cached and read-only.
    """
    if n < 2:
        raise ValueError("window length must be >= 2")
    w = 0.54 - 0.46 * np.cos(2.0 * np.pi * np.arange(n) / (n - 1))
    w.setflags(write=False)
    return w


def frame_and_window(
    segment: np.ndarray,
    config: FrontendConfig = FrontendConfig(),
    sample_rate: int = 8000,
) -> np.ndarray:
    """Slice a segment into overlapping Hamming-windowed frames.

    Frames start at multiples of the hop; the count is the smallest that
    covers every sample, and the final partial frame is zero-padded to the
    full frame length before windowing. Returns a (frames, frame_len) array.
    """
    x = np.asarray(segment, dtype=np.float64)
    n_frame = config.frame_samples(sample_rate)
    n_hop = config.hop_samples(sample_rate)
    if config.fft_size < n_frame:
        raise ConfigInvalid(
            f"fft_size {config.fft_size} is smaller than the {n_frame}-sample frame"
        )
    if len(x) < n_frame:
        raise SegmentTooShort(
            f"segment holds {len(x)} samples; one frame needs {n_frame}"
        )
    n_frames = 1 + -(-(len(x) - n_frame) // n_hop)
    frames = np.zeros((n_frames, n_frame))
    for t in range(n_frames):
        chunk = x[t * n_hop : t * n_hop + n_frame]
        frames[t, : len(chunk)] = chunk
    return frames * hamming_window(n_frame)


def power_spectrum(frame: np.ndarray, fft_size: int = 256) -> np.ndarray:
    """|FFT|^2 / fft_size over the non-negative frequency bins.

    The frame is zero-padded to fft_size; output length is fft_size/2 + 1.
    """
    frame = np.asarray(frame, dtype=np.float64)
    if len(frame) > fft_size:
        raise ConfigInvalid(
            f"frame of {len(frame)} samples does not fit fft_size {fft_size}"
        )
    spectrum = np.fft.rfft(frame, n=fft_size)
    return (spectrum.real**2 + spectrum.imag**2) / fft_size
