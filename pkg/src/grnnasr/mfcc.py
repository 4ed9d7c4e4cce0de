"""Mel-frequency cepstral coefficients and fixed-length utterance features.

A segment becomes a feature vector in four steps: the frontend produces a
power spectrum per frame, a triangular mel filterbank pools the spectrum
into band energies, the log energies go through an orthonormal DCT-II, and
the per-frame coefficient tracks are linearly resampled to a fixed number
of frames so every utterance yields the same dimensionality.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.fft import dct

from .errors import ConfigInvalid, SegmentTooShort
from .frontend import FrontendConfig, frame_and_window, power_spectrum, preemphasize


@dataclass(frozen=True)
class MfccConfig:
    """Filterbank and cepstrum settings.

    target_frames fixes the time-normalized frame count, so feature vectors
    have length target_frames * n_coeffs regardless of utterance duration.
    """

    n_filters: int = 26
    n_coeffs: int = 13
    f_min: float = 300.0
    f_max: float = 3400.0
    log_floor: float = 1e-10
    target_frames: int = 20

    def __post_init__(self):
        if self.n_filters < 1:
            raise ConfigInvalid("n_filters must be >= 1")
        if not 1 <= self.n_coeffs <= self.n_filters:
            raise ConfigInvalid("n_coeffs must lie in [1, n_filters]")
        if not 0 <= self.f_min < self.f_max:
            raise ConfigInvalid("need 0 <= f_min < f_max")
        if not self.log_floor > 0:
            raise ConfigInvalid("log_floor must be > 0")
        if self.target_frames < 2:
            raise ConfigInvalid("target_frames must be >= 2")

    @property
    def feature_dim(self) -> int:
        return self.target_frames * self.n_coeffs


def mel_scale(f):
    """Map frequency in Hz to mel: 2595 * log10(1 + f/700)."""
    f = np.asarray(f, dtype=np.float64)
    if np.any(f < 0):
        raise ValueError("frequency must be >= 0")
    out = 2595.0 * np.log10(1.0 + f / 700.0)
    return float(out) if out.ndim == 0 else out


def mel_to_hz(m):
    """Inverse of mel_scale."""
    m = np.asarray(m, dtype=np.float64)
    out = 700.0 * (10.0 ** (m / 2595.0) - 1.0)
    return float(out) if out.ndim == 0 else out


@lru_cache(maxsize=8)
def _filterbank_cached(config: MfccConfig, sample_rate: int, fft_size: int):
    nyquist = sample_rate / 2.0
    if config.f_max > nyquist:
        raise ConfigInvalid(f"f_max {config.f_max} exceeds Nyquist {nyquist}")
    mel_points = np.linspace(
        mel_scale(config.f_min), mel_scale(config.f_max), config.n_filters + 2
    )
    # Nearest FFT bin to each mel point; bin spacing is sample_rate/fft_size.
    bins = np.rint(mel_to_hz(mel_points) * fft_size / sample_rate).astype(int)
    fb = np.zeros((config.n_filters, fft_size // 2 + 1))
    for m in range(config.n_filters):
        lo, center, hi = bins[m], bins[m + 1], bins[m + 2]
        if hi == lo:
            raise ConfigInvalid(
                f"filter {m} spans zero bins; reduce n_filters or raise fft_size"
            )
        for k in range(lo, center):
            fb[m, k] = (k - lo) / (center - lo)
        for k in range(center, hi):
            fb[m, k] = (hi - k) / (hi - center)
        fb[m, center] = 1.0
    fb.setflags(write=False)
    return fb


def mel_filterbank(
    config: MfccConfig, sample_rate: int, fft_size: int
) -> np.ndarray:
    """Triangular filters over the power-spectrum bins.

    Filter peaks sit on the bins nearest the interior of n_filters + 2
    mel-equally-spaced points between f_min and f_max; each filter peaks at
    exactly 1.0 and is zero outside its triangle. The matrix is cached per
    configuration and returned read-only.
    """
    return _filterbank_cached(config, int(sample_rate), int(fft_size))


def frame_mfcc(
    power: np.ndarray, filterbank: np.ndarray, config: MfccConfig
) -> np.ndarray:
    """Cepstral coefficients of one power-spectrum frame.

    Filter energies are floored at log_floor before the natural log, so the
    output is finite for all-zero input (where only the first coefficient
    is nonzero).
    """
    energies = np.maximum(filterbank @ np.asarray(power, dtype=np.float64),
                          config.log_floor)
    return dct(np.log(energies), type=2, norm="ortho")[: config.n_coeffs]


def time_normalize(cepstra: np.ndarray, target_frames: int) -> np.ndarray:
    """Resample a (frames, coeffs) matrix to target_frames rows.

    Each coefficient track is linearly interpolated along the frame axis.
    A matrix that already has target_frames rows is returned unchanged.
    """
    cepstra = np.asarray(cepstra, dtype=np.float64)
    t_actual = cepstra.shape[0]
    if t_actual == 0:
        raise ValueError("no frames to normalize")
    if t_actual == target_frames:
        return cepstra.copy()
    grid = np.arange(t_actual)
    positions = np.linspace(0.0, t_actual - 1.0, target_frames)
    out = np.empty((target_frames, cepstra.shape[1]))
    for j in range(cepstra.shape[1]):
        out[:, j] = np.interp(positions, grid, cepstra[:, j])
    return out


def extract_features(
    segment: np.ndarray,
    frontend_config: FrontendConfig = FrontendConfig(),
    mfcc_config: MfccConfig = MfccConfig(),
    sample_rate: int = 8000,
) -> np.ndarray:
    """Fixed-length feature vector for one speech segment.

    Pre-emphasis, framing/windowing, per-frame power spectrum and MFCCs,
    then time normalization to target_frames frames, concatenated
    frame-major. Output length is target_frames * n_coeffs.
    """
    x = np.asarray(segment, dtype=np.float64)
    n_frame = frontend_config.frame_samples(sample_rate)
    if len(x) <= n_frame:
        raise SegmentTooShort(
            f"segment holds {len(x)} samples; need more than {n_frame} "
            "for two analysis frames"
        )
    frames = frame_and_window(
        preemphasize(x, frontend_config.preemphasis_a), frontend_config, sample_rate
    )
    fb = mel_filterbank(mfcc_config, sample_rate, frontend_config.fft_size)
    cepstra = np.stack(
        [
            frame_mfcc(power_spectrum(f, frontend_config.fft_size), fb, mfcc_config)
            for f in frames
        ]
    )
    return time_normalize(cepstra, mfcc_config.target_frames).ravel()
