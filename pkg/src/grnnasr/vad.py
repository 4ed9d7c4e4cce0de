"""Voice activity detection from short-time energy and zero-crossing rate.

The signal is split into long overlapping frames (150 ms / 40 ms hop by
default). A frame is declared speech when its energy clears a threshold
derived from the loudest frame, or when a high zero-crossing rate coincides
with non-negligible energy (fricatives). Speech frames are merged into
segments whose sample bounds are tightened using the neighbouring silence
frames, giving hop-level boundary resolution.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .audio_io import AudioBuffer
from .errors import BufferTooShort, ConfigInvalid

# Fraction of the scaled energy threshold a frame must carry before a high
# zero-crossing rate alone can mark it as speech. Keeps DC-free numerical
# noise from triggering the detector.
UNVOICED_ENERGY_FACTOR = 0.1


@dataclass(frozen=True)
class VadConfig:
    """Detection parameters. Durations are in seconds.

    min_gap is not used by detection itself; transcription splits words at
    inter-segment silences of at least this length.
    """

    frame_len: float = 0.150
    hop: float = 0.040
    energy_ratio: float = 0.05
    zcr_threshold: float = 0.25
    energy_floor: float = 1e-6
    hangover_frames: int = 1
    min_speech_frames: int = 2
    min_gap: float = 0.160

    def __post_init__(self):
        if not self.frame_len > self.hop > 0:
            raise ConfigInvalid("frame_len must exceed hop and hop must be > 0")
        if not 0 < self.energy_ratio < 1:
            raise ConfigInvalid("energy_ratio must lie in (0, 1)")
        if not 0 <= self.zcr_threshold <= 1:
            raise ConfigInvalid("zcr_threshold must lie in [0, 1]")
        if not self.energy_floor > 0:
            raise ConfigInvalid("energy_floor must be > 0")
        if self.hangover_frames < 0:
            raise ConfigInvalid("hangover_frames must be >= 0")
        if self.min_speech_frames < 1:
            raise ConfigInvalid("min_speech_frames must be >= 1")
        if self.min_gap < 0:
            raise ConfigInvalid("min_gap must be >= 0")

    def frame_samples(self, sample_rate: int) -> int:
        return int(round(self.frame_len * sample_rate))

    def hop_samples(self, sample_rate: int) -> int:
        return int(round(self.hop * sample_rate))

    def min_gap_samples(self, sample_rate: int) -> int:
        return int(round(self.min_gap * sample_rate))


@dataclass
class FrameFeatures:
    """Per-frame measurements and the speech/non-speech decision."""

    index: int
    energy: float
    zcr: float
    decision: bool


@dataclass(frozen=True)
class SpeechSegment:
    """Half-open sample interval [start_sample, end_sample) marked as speech."""

    start_sample: int
    end_sample: int

    def __len__(self) -> int:
        return self.end_sample - self.start_sample


def frame_energy(frame: np.ndarray) -> float:
    """Mean squared sample value of a non-empty frame."""
    frame = np.asarray(frame, dtype=np.float64)
    if frame.size == 0:
        raise ValueError("frame is empty")
    return float(np.mean(np.square(frame)))


def frame_zcr(frame: np.ndarray) -> float:
    """Sign changes per adjacent sample pair, in [0, 1].

    Zero samples inherit the sign of the most recent nonzero sample, so a
    run of zeros contributes at most one crossing.
    """
    frame = np.asarray(frame, dtype=np.float64)
    n = frame.size
    if n < 2:
        raise ValueError("frame must hold at least 2 samples")
    signs = np.sign(frame)
    nonzero = signs != 0
    idx = np.where(nonzero, np.arange(n), -1)
    last = np.maximum.accumulate(idx)
    filled = np.where(last >= 0, signs[np.maximum(last, 0)], 0.0)
    crossings = np.count_nonzero(filled[:-1] * filled[1:] < 0)
    return crossings / (n - 1)


def _merge_decisions(decisions: list[bool], hangover: int, min_frames: int):
    """Group speech frame indices into runs, bridging short silent gaps."""
    fired = [i for i, d in enumerate(decisions) if d]
    runs: list[tuple[int, int]] = []
    for i in fired:
        if runs and i - runs[-1][1] <= hangover + 1:
            runs[-1] = (runs[-1][0], i)
        else:
            runs.append((i, i))
    return [(a, b) for a, b in runs if b - a + 1 >= min_frames]


def detect(
    buffer: AudioBuffer, config: VadConfig = VadConfig()
) -> tuple[list[FrameFeatures], list[SpeechSegment]]:
    """Run the detector over a whole buffer.

    Returns the per-frame features (energy, zero-crossing rate, decision)
    and the merged speech segments, sorted and disjoint. The energy
    threshold is relative to the loudest frame, so decisions are invariant
    to overall gain as long as the signal stays above the absolute floor.

    Segment bounds use the silence evidence around each speech run: the
    frame before the run rules out speech up to its own end, and the frame
    after rules it out from its own start, so boundaries land within one
    hop of the true transition.
    """
    x = np.asarray(buffer.samples, dtype=np.float64)
    n_frame = config.frame_samples(buffer.sample_rate)
    n_hop = config.hop_samples(buffer.sample_rate)
    if len(x) < n_frame:
        raise BufferTooShort(
            f"buffer holds {len(x)} samples; one frame needs {n_frame}"
        )

    starts = range(0, len(x) - n_frame + 1, n_hop)
    energies = np.array([frame_energy(x[s : s + n_frame]) for s in starts])
    zcrs = np.array([frame_zcr(x[s : s + n_frame]) for s in starts])

    e_thr = max(config.energy_floor, config.energy_ratio * float(energies.max()))
    zcr_gate = max(
        config.energy_floor,
        config.energy_ratio * e_thr * UNVOICED_ENERGY_FACTOR,
    )
    decisions = [
        e > e_thr or (z > config.zcr_threshold and e > zcr_gate)
        for e, z in zip(energies, zcrs)
    ]
    frames = [
        FrameFeatures(index=i, energy=float(e), zcr=float(z), decision=d)
        for i, (e, z, d) in enumerate(zip(energies, zcrs, decisions))
    ]

    n_frames = len(frames)
    segments: list[SpeechSegment] = []
    for i0, i1 in _merge_decisions(
        decisions, config.hangover_frames, config.min_speech_frames
    ):
        start = i0 * n_hop + (n_frame - n_hop) if i0 > 0 else 0
        end = i1 * n_hop + n_hop if i1 < n_frames - 1 else i1 * n_hop + n_frame
        if start >= end:
            # Run too short for silence-evidence bounds; fall back to the
            # samples common to every frame of the run.
            start, end = i1 * n_hop, i0 * n_hop + n_frame
        start = max(start, 0)
        end = min(end, len(x))
        if segments:
            start = max(start, segments[-1].end_sample)
        if start < end:
            segments.append(SpeechSegment(start_sample=start, end_sample=end))
    return frames, segments
