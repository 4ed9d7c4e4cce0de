"""Exception types shared across the package."""


class SpeechError(Exception):
    """Base class for every error this package raises on purpose."""


class MalformedWav(SpeechError):
    """The file does not follow the RIFF/WAVE structure."""


class UnsupportedEncoding(SpeechError):
    """The WAV encoding is not integer PCM or 32-bit float."""


class EmptyAudio(SpeechError):
    """The WAV file decodes to zero samples."""


class SampleRateMismatch(SpeechError):
    """The buffer's sample rate differs from the rate the pipeline requires."""


class EmptyDataset(SpeechError):
    """A dataset directory contains no usable WAV files."""


class BufferTooShort(SpeechError):
    """The buffer is shorter than a single analysis frame."""


class SegmentTooShort(SpeechError):
    """The segment is too short to produce the required frames."""


class ConfigInvalid(SpeechError, ValueError):
    """A configuration value violates its documented range."""


class DimensionMismatch(SpeechError, ValueError):
    """Vector or matrix dimensions do not agree."""


class EmptyTrainingSet(SpeechError):
    """Training was attempted with zero examples."""


class MalformedModel(SpeechError):
    """A model file has a bad magic, version, or length."""


class NoSpeechDetected(SpeechError):
    """Voice activity detection found no speech in the input."""


class UnknownLabel(SpeechError):
    """A label is not present in the trained model."""
