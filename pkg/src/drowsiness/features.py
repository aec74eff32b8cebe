"""Feature vectors for the AU, HOG and HOG+AU attribute sets.

Layout of one frame vector:

* AU:          17 intensities (0-5), then 18 presences (0/1) unless presences are off
* HOG:         the frame's HOG vector as stored
* HOG_AND_AU:  HOG block followed by the AU block

A window vector is the element-wise mean of its frames' vectors.
"""

from __future__ import annotations

import enum
import struct
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimMismatch, EmptyWindow, FormatError, MissingHog
from .ingest import FrameFeatures
from .sampling import WindowSample


class AttributeSet(str, enum.Enum):
    AU = "AU"
    HOG = "HOG"
    HOG_AND_AU = "HOG_AND_AU"


@dataclass(frozen=True)
class FeatureSpec:
    attribute_set: AttributeSet = AttributeSet.AU
    include_presence: bool = True
    # None: standardize for SVMs, leave raw for forests.
    standardize: bool | None = None

    def __post_init__(self):
        object.__setattr__(self, "attribute_set", AttributeSet(self.attribute_set))

    @property
    def uses_hog(self) -> bool:
        return self.attribute_set is not AttributeSet.AU

    @property
    def uses_au(self) -> bool:
        return self.attribute_set is not AttributeSet.HOG

    @property
    def tag(self) -> str:
        return f"{self.attribute_set.value};presence={int(self.include_presence)}"

    @classmethod
    def from_tag(cls, tag: str) -> "FeatureSpec":
        try:
            name, presence = tag.split(";")
            return cls(AttributeSet(name), presence == "presence=1")
        except ValueError:
            raise FormatError(f"bad feature spec tag {tag!r}") from None

    def dim(self, hog_dim: int | None = None) -> int:
        d = 35 if self.include_presence else 17
        if not self.uses_hog:
            return d
        if hog_dim is None:
            raise MissingHog(f"{self.attribute_set.value} needs a HOG dimension")
        return hog_dim + (d if self.uses_au else 0)


def _au_block(frame: FrameFeatures, include_presence: bool) -> np.ndarray:
    if include_presence:
        return np.array(frame.au_intensity + tuple(frame.au_presence), dtype=np.float64)
    return np.array(frame.au_intensity, dtype=np.float64)


def frame_vector(frame: FrameFeatures, spec: FeatureSpec) -> np.ndarray:
    if spec.uses_hog and frame.hog is None:
        raise MissingHog(f"frame {frame.frame_index} has no HOG vector")
    if spec.attribute_set is AttributeSet.AU:
        return _au_block(frame, spec.include_presence)
    hog = np.asarray(frame.hog, dtype=np.float64)
    if spec.attribute_set is AttributeSet.HOG:
        return hog.copy()
    return np.concatenate([hog, _au_block(frame, spec.include_presence)])


def window_vector(window: WindowSample | Sequence[FrameFeatures], spec: FeatureSpec) -> np.ndarray:
    frames = window.frames if isinstance(window, WindowSample) else window
    if not len(frames):
        raise EmptyWindow("window has no frames")
    acc = frame_vector(frames[0], spec)
    for f in frames[1:]:
        v = frame_vector(f, spec)
        if v.shape != acc.shape:
            raise DimMismatch(f"frame {f.frame_index}: dim {v.size} != {acc.size}")
        acc += v
    return acc / len(frames)


@dataclass(frozen=True)
class Scaler:
    """Per-dimension standardization using the population standard deviation."""
    means: np.ndarray
    stdevs: np.ndarray

    @property
    def dim(self) -> int:
        return self.means.size

    def apply(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1] != self.dim:
            raise DimMismatch(f"scaler fitted on dim {self.dim}, got {x.shape[-1]}")
        return (x - self.means) / self.stdevs

    def invert(self, z: np.ndarray) -> np.ndarray:
        return np.asarray(z) * self.stdevs + self.means

    def to_json(self) -> dict:
        return {"means": self.means.tolist(), "stdevs": self.stdevs.tolist()}

    @classmethod
    def from_json(cls, d: dict) -> "Scaler":
        return cls(np.array(d["means"], dtype=np.float64), np.array(d["stdevs"], dtype=np.float64))


def fit_scaler(train) -> Scaler:
    X = np.atleast_2d(np.asarray(train, dtype=np.float64))
    if X.shape[0] == 0:
        raise EmptyWindow("cannot fit a scaler on zero rows")
    means = X.mean(axis=0)
    std = X.std(axis=0)
    std[std == 0.0] = 1.0
    return Scaler(means, std)


def apply_scaler(scaler: Scaler, v) -> np.ndarray:
    return scaler.apply(v)


# ------------------------------------------------------------ matrix file format
#
#   bytes 0-3   magic b"DFM1"
#   uint32      rows
#   uint32      dims
#   uint16      tag length, then the UTF-8 spec tag
#   float32     rows*dims values, row-major
# All integers and floats little-endian.

_MAGIC = b"DFM1"
_HEAD = struct.Struct("<4sIIH")


def write_matrix(X: np.ndarray, spec: FeatureSpec | str) -> bytes:
    X = np.atleast_2d(np.asarray(X))
    tag = (spec.tag if isinstance(spec, FeatureSpec) else spec).encode("utf-8")
    rows, dims = X.shape if X.size else (0, X.shape[-1])
    return _HEAD.pack(_MAGIC, rows, dims, len(tag)) + tag + np.ascontiguousarray(X, dtype="<f4").tobytes()


def read_matrix(data: bytes) -> tuple[np.ndarray, str]:
    if len(data) < _HEAD.size:
        raise FormatError("feature matrix header truncated")
    magic, rows, dims, tag_len = _HEAD.unpack_from(data)
    if magic != _MAGIC:
        raise FormatError("not a feature matrix file")
    start = _HEAD.size + tag_len
    tag = data[_HEAD.size:start].decode("utf-8")
    if len(data) != start + 4 * rows * dims:
        raise FormatError(f"feature matrix body size {len(data) - start} != {4 * rows * dims}")
    X = np.frombuffer(data, dtype="<f4", offset=start).reshape(rows, dims).astype(np.float64)
    return X, tag
