"""Generalized regression neural network classifier and model persistence.

The network memorizes every training vector as a pattern center. A query is
scored against each center with a Gaussian kernel h_i = exp(-d_i^2 / (2*s^2))
where d_i^2 is the squared Euclidean distance and s the spread, and the
output is the kernel-weighted average of the stored one-hot targets
(Nadaraya-Watson regression). Scores therefore form a convex combination of
the target rows and sum to 1. Training is a single pass; there is no
iterative optimization.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from .errors import ConfigInvalid, DimensionMismatch, EmptyTrainingSet, MalformedModel
from .frontend import FrontendConfig
from .mfcc import MfccConfig

MODEL_MAGIC = b"GRNN"
MODEL_VERSION = 1

# Order of the f64 config block in the model file.
_CONFIG_FIELDS = (
    ("frontend", "preemphasis_a"),
    ("frontend", "frame_len"),
    ("frontend", "hop"),
    ("frontend", "fft_size"),
    ("mfcc", "n_filters"),
    ("mfcc", "n_coeffs"),
    ("mfcc", "f_min"),
    ("mfcc", "f_max"),
    ("mfcc", "log_floor"),
    ("mfcc", "target_frames"),
)


@dataclass
class Recognition:
    """Classifier verdict: winning label, all per-label scores, max score."""

    label: str
    scores: np.ndarray
    confidence: float


class GrnnClassifier(BaseEstimator, ClassifierMixin):
    """Kernel-regression classifier with one pattern unit per example.

    Parameters
    ----------
    spread : float, default 0.5
        Width of the Gaussian kernels. Smaller values push the classifier
        toward nearest-neighbour behaviour.

    Attributes (after fit)
    ----------------------
    centers_ : (n_examples, n_features) stored training vectors
    classes_ : sorted distinct labels
    targets_ : (n_examples, n_classes) one-hot rows aligned with centers_
    """

    def __init__(self, spread: float = 0.5):
        self.spread = spread

    def fit(self, X, y):
        if not self.spread > 0:
            raise ConfigInvalid("spread must be > 0")
        try:
            X = np.asarray(X, dtype=np.float64)
        except ValueError as exc:
            raise DimensionMismatch(f"feature vectors have unequal lengths: {exc}")
        if X.ndim != 2:
            raise DimensionMismatch(f"expected a 2-D feature matrix, got {X.ndim}-D")
        if X.shape[0] == 0:
            raise EmptyTrainingSet("no training examples")
        if not np.all(np.isfinite(X)):
            raise ValueError("training features must be finite")
        y = np.asarray(y)
        if y.shape != (X.shape[0],):
            raise DimensionMismatch(
                f"{X.shape[0]} feature vectors but {y.size} labels"
            )
        self.classes_ = np.unique(y)
        self.centers_ = X.copy()
        self.targets_ = (y[:, None] == self.classes_[None, :]).astype(np.float64)
        self.n_features_in_ = X.shape[1]
        return self

    def _scores(self, X: np.ndarray) -> np.ndarray:
        d2 = ((X[:, None, :] - self.centers_[None, :, :]) ** 2).sum(axis=-1)
        # Shifting the exponent by the minimum distance cancels in the
        # weighted-average ratio but keeps the largest kernel at exactly 1,
        # so the denominator cannot underflow for finite inputs.
        shift = d2.min(axis=1, keepdims=True)
        h = np.exp(-(d2 - shift) / (2.0 * self.spread**2))
        denom = h.sum(axis=1, keepdims=True)
        scores = (h @ self.targets_) / denom
        bad = ~np.isfinite(denom[:, 0]) | (denom[:, 0] == 0.0)
        if np.any(bad):
            scores[bad] = self.targets_[np.argmin(d2[bad], axis=1)]
        return scores

    def _validate_input(self, X) -> np.ndarray:
        check_is_fitted(self, "centers_")
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.ndim != 2 or X.shape[1] != self.n_features_in_:
            raise DimensionMismatch(
                f"expected vectors of length {self.n_features_in_}, "
                f"got shape {X.shape}"
            )
        return X

    def predict_proba(self, X) -> np.ndarray:
        """Per-class scores, one row per input vector; rows sum to 1."""
        return self._scores(self._validate_input(X))

    def predict(self, X) -> np.ndarray:
        """Class of the highest score; ties go to the lowest label index."""
        return self.classes_[np.argmax(self.predict_proba(X), axis=1)]

    def classify(self, x) -> Recognition:
        """Score a single feature vector."""
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 1:
            raise DimensionMismatch(f"expected a 1-D vector, got {x.ndim}-D")
        scores = self.predict_proba(x)[0]
        best = int(np.argmax(scores))
        return Recognition(
            label=str(self.classes_[best]),
            scores=scores,
            confidence=float(scores[best]),
        )


def _config_values(frontend: FrontendConfig, mfcc: MfccConfig) -> list[float]:
    objs = {"frontend": frontend, "mfcc": mfcc}
    return [float(getattr(objs[which], name)) for which, name in _CONFIG_FIELDS]


def save_model(
    path: str | Path,
    classifier: GrnnClassifier,
    frontend_config: FrontendConfig,
    mfcc_config: MfccConfig,
) -> None:
    """Serialize a fitted classifier plus its feature configs.

    Layout (little-endian): magic "GRNN", version u32, feature_dim u32,
    n u32, L u32, spread f64, label table (u32 byte length + UTF-8 per
    label), ten f64 config fields (pre-emphasis a, frame length, hop, FFT
    size, filter count, coefficient count, band edges, log floor, target
    frames), centers row-major f64, targets row-major f64.
    """
    check_is_fitted(classifier, "centers_")
    n, d = classifier.centers_.shape
    labels = [str(c) for c in classifier.classes_]
    parts = [
        MODEL_MAGIC,
        struct.pack("<IIII", MODEL_VERSION, d, n, len(labels)),
        struct.pack("<d", float(classifier.spread)),
    ]
    for label in labels:
        encoded = label.encode("utf-8")
        parts.append(struct.pack("<I", len(encoded)) + encoded)
    parts.append(
        struct.pack(f"<{len(_CONFIG_FIELDS)}d",
                    *_config_values(frontend_config, mfcc_config))
    )
    parts.append(classifier.centers_.astype("<f8").tobytes())
    parts.append(classifier.targets_.astype("<f8").tobytes())
    Path(path).write_bytes(b"".join(parts))


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise MalformedModel("model file is truncated")
        out = self.data[self.pos : self.pos + n]
        self.pos += n
        return out

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def f64(self) -> float:
        return struct.unpack("<d", self.take(8))[0]


def load_model(path: str | Path) -> tuple[GrnnClassifier, FrontendConfig, MfccConfig]:
    """Read a model file written by save_model; the round trip is bit-exact."""
    r = _Reader(Path(path).read_bytes())
    if r.take(4) != MODEL_MAGIC:
        raise MalformedModel(f"bad magic bytes: {path}")
    version = r.u32()
    if version != MODEL_VERSION:
        raise MalformedModel(f"unsupported model version {version}: {path}")
    d, n, n_labels = r.u32(), r.u32(), r.u32()
    spread = r.f64()
    try:
        labels = [r.take(r.u32()).decode("utf-8") for _ in range(n_labels)]
    except UnicodeDecodeError:
        raise MalformedModel(f"label table is not valid UTF-8: {path}")
    values = [r.f64() for _ in _CONFIG_FIELDS]
    try:
        frontend = FrontendConfig(
            preemphasis_a=values[0],
            frame_len=values[1],
            hop=values[2],
            fft_size=int(values[3]),
        )
        mfcc = MfccConfig(
            n_filters=int(values[4]),
            n_coeffs=int(values[5]),
            f_min=values[6],
            f_max=values[7],
            log_floor=values[8],
            target_frames=int(values[9]),
        )
    except ConfigInvalid as exc:
        raise MalformedModel(f"invalid config block ({exc}): {path}")
    centers = np.frombuffer(r.take(8 * n * d), "<f8").reshape(n, d).copy()
    targets = np.frombuffer(r.take(8 * n * n_labels), "<f8").reshape(n, n_labels).copy()
    if r.pos != len(r.data):
        raise MalformedModel(f"{len(r.data) - r.pos} trailing bytes: {path}")
    if n == 0:
        raise MalformedModel(f"model holds no pattern units: {path}")

    clf = GrnnClassifier(spread=spread)
    clf.classes_ = np.asarray(labels)
    clf.centers_ = centers
    clf.targets_ = targets
    clf.n_features_in_ = d
    return clf, frontend, mfcc
