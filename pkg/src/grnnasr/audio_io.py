"""WAV decoding and dataset directory scanning.

Supports RIFF/WAVE files with integer PCM (8/16/24/32-bit) or 32-bit float
samples, mono or multichannel. Multichannel audio is averaged down to mono.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import EmptyAudio, EmptyDataset, MalformedWav, UnsupportedEncoding

# Rate the recognition pipeline operates at; files at other rates are rejected
# by the pipeline rather than resampled.
PIPELINE_SAMPLE_RATE = 8000

_FORMAT_PCM = 0x0001
_FORMAT_FLOAT = 0x0003
_FORMAT_EXTENSIBLE = 0xFFFE


@dataclass
class AudioBuffer:
    """Mono audio with samples in [-1.0, +1.0] and a sample rate in Hz."""

    samples: np.ndarray
    sample_rate: int

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def duration(self) -> float:
        """Length in seconds."""
        return len(self.samples) / self.sample_rate


@dataclass
class DatasetEntry:
    """One labeled utterance file. The label is the parent directory name."""

    label: str
    path: Path
    buffer: AudioBuffer | None = field(default=None, repr=False)

    def load(self) -> AudioBuffer:
        """Decode the file, caching the result on the entry."""
        if self.buffer is None:
            self.buffer = load_wav(self.path)
        return self.buffer


def _parse_fmt(chunk: bytes) -> tuple[int, int, int, int]:
    if len(chunk) < 16:
        raise MalformedWav("fmt chunk shorter than 16 bytes")
    tag, channels, rate, _byte_rate, _block_align, bits = struct.unpack_from(
        "<HHIIHH", chunk, 0
    )
    if tag == _FORMAT_EXTENSIBLE:
        # Actual format code is the first field of the SubFormat GUID.
        if len(chunk) < 26:
            raise MalformedWav("extensible fmt chunk truncated")
        (tag,) = struct.unpack_from("<H", chunk, 24)
    if channels < 1:
        raise MalformedWav("fmt chunk declares zero channels")
    if rate < 1:
        raise MalformedWav("fmt chunk declares non-positive sample rate")
    return tag, channels, rate, bits


def _decode_samples(raw: bytes, tag: int, bits: int) -> np.ndarray:
    if tag == _FORMAT_PCM:
        if bits == 8:
            # 8-bit WAV PCM is unsigned.
            return (np.frombuffer(raw, "<u1").astype(np.float64) - 128.0) / 128.0
        if bits == 16:
            return np.frombuffer(raw, "<i2").astype(np.float64) / 32768.0
        if bits == 24:
            b = np.frombuffer(raw, "<u1").reshape(-1, 3).astype(np.int32)
            v = b[:, 0] | (b[:, 1] << 8) | (b[:, 2] << 16)
            v = np.where(v >= 1 << 23, v - (1 << 24), v)
            return v.astype(np.float64) / float(1 << 23)
        if bits == 32:
            return np.frombuffer(raw, "<i4").astype(np.float64) / float(1 << 31)
        raise UnsupportedEncoding(f"unsupported PCM bit depth: {bits}")
    if tag == _FORMAT_FLOAT:
        if bits == 32:
            x = np.frombuffer(raw, "<f4").astype(np.float64)
            if not np.all(np.isfinite(x)):
                raise MalformedWav("float WAV contains non-finite samples")
            return np.clip(x, -1.0, 1.0)
        raise UnsupportedEncoding(f"unsupported float bit depth: {bits}")
    raise UnsupportedEncoding(f"unsupported WAV format tag: 0x{tag:04X}")


def load_wav(path: str | Path) -> AudioBuffer:
    """Decode a RIFF/WAVE file into a mono AudioBuffer.

    Integer PCM is scaled by 1/2^(bits-1); multichannel frames are averaged
    to a single channel. Raises MalformedWav, UnsupportedEncoding, or
    EmptyAudio when the file cannot be decoded.
    """
    data = Path(path).read_bytes()
    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise MalformedWav(f"not a RIFF/WAVE file: {path}")

    fmt_chunk = None
    data_chunk = None
    pos = 12
    while pos + 8 <= len(data):
        chunk_id = data[pos : pos + 4]
        (size,) = struct.unpack_from("<I", data, pos + 4)
        body = data[pos + 8 : pos + 8 + size]
        if len(body) < size:
            raise MalformedWav(f"truncated {chunk_id!r} chunk: {path}")
        if chunk_id == b"fmt ":
            fmt_chunk = body
        elif chunk_id == b"data":
            data_chunk = body
            break
        pos += 8 + size + (size & 1)  # chunks are word-aligned

    if fmt_chunk is None:
        raise MalformedWav(f"missing fmt chunk: {path}")
    if data_chunk is None:
        raise MalformedWav(f"missing data chunk: {path}")

    tag, channels, rate, bits = _parse_fmt(fmt_chunk)
    if bits % 8 != 0 or bits == 0:
        raise UnsupportedEncoding(f"unsupported bit depth: {bits}")
    block = (bits // 8) * channels
    if len(data_chunk) == 0:
        raise EmptyAudio(f"WAV file holds zero samples: {path}")
    if len(data_chunk) % block != 0:
        raise MalformedWav(f"data chunk is not a whole number of frames: {path}")

    samples = _decode_samples(data_chunk, tag, bits)
    if channels > 1:
        samples = samples.reshape(-1, channels).mean(axis=1)
    return AudioBuffer(samples=samples, sample_rate=rate)


def write_wav(path: str | Path, buffer: AudioBuffer) -> None:
    """Write a buffer as 16-bit PCM mono WAV."""
    x = np.asarray(buffer.samples, dtype=np.float64)
    q = np.clip(np.rint(x * 32768.0), -32768, 32767).astype("<i2")
    payload = q.tobytes()
    header = b"RIFF" + struct.pack("<I", 36 + len(payload)) + b"WAVE"
    header += b"fmt " + struct.pack(
        "<IHHIIHH",
        16,
        _FORMAT_PCM,
        1,
        buffer.sample_rate,
        buffer.sample_rate * 2,
        2,
        16,
    )
    header += b"data" + struct.pack("<I", len(payload))
    Path(path).write_bytes(header + payload)


def scan_dataset(root: str | Path) -> list[DatasetEntry]:
    """Enumerate a root/<label>/<file>.wav tree, sorted by label then filename.

    Labels are the immediate parent directory names, verbatim. Raises
    EmptyDataset when no .wav files are found.
    """
    root = Path(root)
    if not root.is_dir():
        raise EmptyDataset(f"dataset root is not a directory: {root}")
    entries = []
    for label_dir in sorted(p for p in root.iterdir() if p.is_dir()):
        for wav in sorted(label_dir.iterdir()):
            if wav.is_file() and wav.suffix.lower() == ".wav":
                entries.append(DatasetEntry(label=label_dir.name, path=wav))
    if not entries:
        raise EmptyDataset(f"no .wav files under {root}")
    return entries
