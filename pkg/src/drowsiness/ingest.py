"""Parsers for facial-feature exports and dataset indexing.

Two per-recording files are consumed:

* an Action Unit CSV in OpenFace's export naming (``frame``, ``timestamp``,
  ``confidence``, ``success``, ``AU01_r`` ... ``AU45_r``, ``AU01_c`` ... ``AU45_c``);
* a dense HOG stream made of fixed-layout records, all little-endian::

      uint32 cols | uint32 rows | uint32 channels | float32 validity | float32 * (rows*cols*channels)

  A validity of 0.0 marks a frame where face tracking failed.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import os
import re
import struct
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import BinaryIO, Iterable, NamedTuple, Sequence

import numpy as np

from .attention import Label, classify_scale
from .errors import (
    DataError,
    DimensionMismatch,
    DuplicateRecording,
    LengthMismatch,
    MalformedRow,
    MissingColumn,
    MissingHog,
    TruncatedRecord,
    UnparseablePath,
    UsageError,
)

log = logging.getLogger(__name__)

INTENSITY_AUS = ("AU01", "AU02", "AU04", "AU05", "AU06", "AU07", "AU09", "AU10", "AU12",
                 "AU14", "AU15", "AU17", "AU20", "AU23", "AU25", "AU26", "AU45")
# AU28 (lip suck) is only scored for presence.
PRESENCE_AUS = ("AU01", "AU02", "AU04", "AU05", "AU06", "AU07", "AU09", "AU10", "AU12",
                "AU14", "AU15", "AU17", "AU20", "AU23", "AU25", "AU26", "AU28", "AU45")
AU45_INTENSITY = INTENSITY_AUS.index("AU45")
AU45_PRESENCE = PRESENCE_AUS.index("AU45")

AU_MAX = 5.0


@dataclass(frozen=True, eq=False)
class FrameFeatures:
    frame_index: int
    timestamp_s: float
    confidence: float
    success: bool
    au_intensity: tuple[float, ...]
    au_presence: tuple[int, ...]
    hog: np.ndarray | None = None

    def __eq__(self, other):
        if not isinstance(other, FrameFeatures):
            return NotImplemented
        same_hog = (self.hog is None and other.hog is None) or (
            self.hog is not None and other.hog is not None and np.array_equal(self.hog, other.hog))
        return (self.frame_index, self.timestamp_s, self.confidence, self.success,
                self.au_intensity, self.au_presence) == (
                other.frame_index, other.timestamp_s, other.confidence, other.success,
                other.au_intensity, other.au_presence) and same_hog


@dataclass(frozen=True, eq=False)
class HogFrame:
    frame_index: int
    cols: int
    rows: int
    channels: int
    values: np.ndarray          # float32, length rows*cols*channels
    flag: float = 1.0           # raw validity float, kept for bit-exact rewrite

    @property
    def valid(self) -> bool:
        return self.flag != 0.0

    def __len__(self) -> int:
        return self.values.size


class ParsedAu(NamedTuple):
    frames: list[FrameFeatures]
    n_clamped: int


def _text_stream(source) -> io.TextIOBase:
    if isinstance(source, (bytes, bytearray)):
        return io.StringIO(bytes(source).decode("utf-8-sig"))
    if isinstance(source, str):
        return io.StringIO(source)
    if isinstance(source, io.TextIOBase):
        return source
    return io.TextIOWrapper(source, encoding="utf-8-sig", newline="")


def parse_au_csv(source) -> ParsedAu:
    """Parse an OpenFace-style AU CSV.

    ``source`` may be bytes, a str, or a binary/text stream. Intensities
    outside [0, 5] are clamped and counted in ``n_clamped``.
    """
    reader = csv.reader(_text_stream(source), skipinitialspace=True)
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise MissingColumn("empty input: no header row") from None
    col = {name: i for i, name in enumerate(header)}
    required = ["frame", "timestamp", "confidence", "success"]
    required += [f"{au}_r" for au in INTENSITY_AUS] + [f"{au}_c" for au in PRESENCE_AUS]
    missing = [name for name in required if name not in col]
    if missing:
        raise MissingColumn(f"missing required column(s): {', '.join(missing)}")
    r_idx = [col[f"{au}_r"] for au in INTENSITY_AUS]
    c_idx = [col[f"{au}_c"] for au in PRESENCE_AUS]

    frames: list[FrameFeatures] = []
    clamped = 0
    last_frame = None
    for row_no, row in enumerate(reader, start=1):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) < len(header):
            raise MalformedRow(row_no, f"expected {len(header)} cells, got {len(row)}")
        try:
            frame_f = float(row[col["frame"]])
            timestamp = float(row[col["timestamp"]])
            confidence = float(row[col["confidence"]])
            success = float(row[col["success"]])
            raw_r = [float(row[i]) for i in r_idx]
            raw_c = [float(row[i]) for i in c_idx]
        except ValueError as exc:
            raise MalformedRow(row_no, f"non-numeric cell ({exc})") from None
        if frame_f != int(frame_f) or frame_f < 0:
            raise MalformedRow(row_no, f"frame index must be a non-negative integer, got {frame_f}")
        frame_index = int(frame_f)
        if last_frame is not None and frame_index <= last_frame:
            raise MalformedRow(row_no, f"frame index {frame_index} not after {last_frame}")
        last_frame = frame_index
        if any(v != v for v in raw_r):
            raise MalformedRow(row_no, "NaN intensity")
        intensity = []
        for v in raw_r:
            if v < 0.0 or v > AU_MAX:
                clamped += 1
                v = min(max(v, 0.0), AU_MAX)
            intensity.append(v)
        if any(v not in (0.0, 1.0) for v in raw_c):
            raise MalformedRow(row_no, "AU presence values must be 0 or 1")
        frames.append(FrameFeatures(
            frame_index=frame_index,
            timestamp_s=max(timestamp, 0.0),
            confidence=min(max(confidence, 0.0), 1.0),
            success=success != 0.0,
            au_intensity=tuple(intensity),
            au_presence=tuple(int(v) for v in raw_c),
        ))
    if clamped:
        log.warning("clamped %d AU intensity value(s) to [0, %g]", clamped, AU_MAX)
    return ParsedAu(frames, clamped)


def write_au_csv(frames: Iterable[FrameFeatures]) -> str:
    """Serialize frames back to the OpenFace column layout (used for fixtures)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["frame", "timestamp", "confidence", "success"]
               + [f"{au}_r" for au in INTENSITY_AUS] + [f"{au}_c" for au in PRESENCE_AUS])
    for f in frames:
        w.writerow([f.frame_index, repr(f.timestamp_s), repr(f.confidence), int(f.success)]
                   + [repr(float(v)) for v in f.au_intensity] + [int(v) for v in f.au_presence])
    return buf.getvalue()


_HOG_HEAD = struct.Struct("<IIIf")


def parse_hog_stream(source) -> list[HogFrame]:
    """Parse a concatenation of HOG records; frames are numbered 0, 1, 2, ..."""
    data = source if isinstance(source, (bytes, bytearray, memoryview)) else source.read()
    data = bytes(data)
    frames: list[HogFrame] = []
    offset = 0
    dims = None
    while offset < len(data):
        if len(data) - offset < _HOG_HEAD.size:
            raise TruncatedRecord(offset, "truncated record header")
        cols, rows, chans, flag = _HOG_HEAD.unpack_from(data, offset)
        if cols == 0 or rows == 0 or chans == 0:
            raise DimensionMismatch(f"zero HOG dimension at byte offset {offset}")
        if dims is None:
            dims = (cols, rows, chans)
        elif dims != (cols, rows, chans):
            raise DimensionMismatch(
                f"HOG dims changed from {dims} to {(cols, rows, chans)} at byte offset {offset}")
        n = cols * rows * chans
        start = offset + _HOG_HEAD.size
        if len(data) - start < 4 * n:
            raise TruncatedRecord(offset)
        values = np.frombuffer(data, dtype="<f4", count=n, offset=start).astype(np.float32)
        frames.append(HogFrame(len(frames), cols, rows, chans, values, flag))
        offset = start + 4 * n
    return frames


def write_hog(frames: Iterable[HogFrame]) -> bytes:
    out = bytearray()
    for f in frames:
        out += _HOG_HEAD.pack(f.cols, f.rows, f.channels, f.flag)
        out += np.asarray(f.values, dtype="<f4").tobytes()
    return bytes(out)


def hog_dim_of(path: str | os.PathLike) -> int | None:
    """Feature dimension from the first record header, None for an empty file."""
    with open(path, "rb") as fh:
        head = fh.read(_HOG_HEAD.size)
    if not head:
        return None
    if len(head) < _HOG_HEAD.size:
        raise TruncatedRecord(0, "truncated record header")
    cols, rows, chans, _ = _HOG_HEAD.unpack(head)
    return cols * rows * chans


def join_features(au: Sequence[FrameFeatures], hog: Sequence[HogFrame], slack: int = 0) -> list[FrameFeatures]:
    """Attach HOG vectors to AU frames by position.

    Up to ``slack`` trailing frames of the longer sequence are discarded.
    A frame whose HOG record is flagged invalid comes out with success=False.
    """
    if abs(len(au) - len(hog)) > slack:
        raise LengthMismatch(f"{len(au)} AU frames vs {len(hog)} HOG frames (slack {slack})")
    out = []
    for a, h in zip(au, hog):
        out.append(FrameFeatures(
            frame_index=a.frame_index, timestamp_s=a.timestamp_s, confidence=a.confidence,
            success=a.success and h.valid, au_intensity=a.au_intensity,
            au_presence=a.au_presence, hog=h.values,
        ))
    return out


# ---------------------------------------------------------------- dataset index

@dataclass(frozen=True)
class Layout:
    """How recordings are laid out on disk.

    ``pattern`` is a regular expression matched against each AU file's path
    relative to the dataset root (POSIX separators). It must define the
    named groups ``subject`` and ``scale`` and may define ``fold``. The HOG
    file sits next to the AU file with ``hog_suffix`` in place of ``au_suffix``.
    """
    pattern: str = r"^(?P<subject>[^/]+)/(?P<scale>\d+)\.csv$"
    au_suffix: str = ".csv"
    hog_suffix: str = ".hog"
    fps: float = 30.0

    @classmethod
    def load(cls, path: str | os.PathLike | None) -> "Layout":
        if path is None:
            return cls()
        try:
            cfg = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read layout config {path}: {exc}") from None
        unknown = set(cfg) - {"pattern", "au_suffix", "hog_suffix", "fps"}
        if unknown:
            raise UsageError(f"unknown layout key(s): {sorted(unknown)}")
        return cls(**cfg)

    def compiled(self) -> re.Pattern:
        try:
            rx = re.compile(self.pattern)
        except re.error as exc:
            raise UsageError(f"invalid layout pattern {self.pattern!r}: {exc}") from None
        if not {"subject", "scale"} <= set(rx.groupindex):
            raise UsageError("layout pattern needs named groups 'subject' and 'scale'")
        return rx


@dataclass(frozen=True)
class RecordingMeta:
    subject_id: str
    scale_value: int
    label: Label
    au_path: str
    hog_path: str | None = None
    fold: int | None = None

    def to_json(self) -> dict:
        d = asdict(self)
        d["label"] = self.label.value
        return d

    @classmethod
    def from_json(cls, d: dict) -> "RecordingMeta":
        return cls(**{**d, "label": Label(d["label"])})


@dataclass(frozen=True)
class DatasetIndex:
    recordings: list[RecordingMeta] = field(default_factory=list)
    hog_dim: int | None = None
    root: str = "."
    fps: float = 30.0

    FORMAT = "drowsiness-index/1"

    def resolve(self, rel: str) -> Path:
        return Path(self.root) / rel

    def to_json(self) -> str:
        doc = {"format": self.FORMAT, "root": self.root, "fps": self.fps, "hog_dim": self.hog_dim,
               "recordings": [r.to_json() for r in self.recordings]}
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "DatasetIndex":
        from .errors import FormatError
        doc = json.loads(text)
        if doc.get("format") != cls.FORMAT:
            raise FormatError(f"not a dataset index (format {doc.get('format')!r})")
        return cls([RecordingMeta.from_json(r) for r in doc["recordings"]], doc["hog_dim"],
                   doc["root"], doc["fps"])


def scan_dataset(root: str | os.PathLike, layout: Layout | None = None) -> DatasetIndex:
    """Index every AU file under ``root``; ordering is (subject, scale)."""
    layout = layout or Layout()
    rx = layout.compiled()
    root_p = Path(root)
    if not root_p.is_dir():
        raise UsageError(f"dataset root {root} is not a directory")
    found: dict[tuple[str, int], RecordingMeta] = {}
    for path in sorted(root_p.rglob(f"*{layout.au_suffix}")):
        if not path.is_file():
            continue
        rel = path.relative_to(root_p).as_posix()
        m = rx.search(rel)
        if m is None:
            raise UnparseablePath(rel)
        try:
            scale = int(m.group("scale"))
            fold = int(m.group("fold")) if "fold" in rx.groupindex and m.group("fold") is not None else None
        except ValueError:
            raise UnparseablePath(rel, "non-integer scale or fold") from None
        subject = m.group("subject")
        key = (subject, scale)
        if key in found:
            raise DuplicateRecording(f"subject {subject!r} scale {scale}: {found[key].au_path} and {rel}")
        hog = path.with_name(path.name[: -len(layout.au_suffix)] + layout.hog_suffix)
        found[key] = RecordingMeta(
            subject_id=subject, scale_value=scale, label=classify_scale(scale), au_path=rel,
            hog_path=hog.relative_to(root_p).as_posix() if hog.is_file() else None, fold=fold,
        )
    recordings = [found[k] for k in sorted(found)]
    hog_dim = None
    for rec in recordings:
        if rec.hog_path is None:
            continue
        dim = hog_dim_of(root_p / rec.hog_path)
        if dim is None:
            continue
        if hog_dim is None:
            hog_dim = dim
        elif dim != hog_dim:
            raise DimensionMismatch(f"{rec.hog_path}: HOG dim {dim} differs from {hog_dim}")
    return DatasetIndex(recordings, hog_dim, str(root), layout.fps)


def load_recording(index: DatasetIndex, rec: RecordingMeta, with_hog: bool = True) -> list[FrameFeatures]:
    """Parse one recording's AU file and, when present and requested, join its HOG stream."""
    try:
        with open(index.resolve(rec.au_path), "rb") as fh:
            frames = parse_au_csv(fh).frames
    except FileNotFoundError:
        raise DataError(f"indexed AU file {rec.au_path} is gone") from None
    if with_hog and rec.hog_path is not None:
        try:
            with open(index.resolve(rec.hog_path), "rb") as fh:
                frames = join_features(frames, parse_hog_stream(fh))
        except FileNotFoundError:
            raise MissingHog(f"indexed HOG file {rec.hog_path} is gone") from None
    return frames


def hog_validity(path: str | os.PathLike) -> list[bool]:
    """Per-frame validity flags of a HOG file, read from record headers only."""
    flags = []
    size = os.path.getsize(path)
    with open(path, "rb") as fh:
        offset = 0
        while offset < size:
            head = fh.read(_HOG_HEAD.size)
            if len(head) < _HOG_HEAD.size:
                raise TruncatedRecord(offset, "truncated record header")
            cols, rows, chans, flag = _HOG_HEAD.unpack(head)
            body = 4 * cols * rows * chans
            if offset + _HOG_HEAD.size + body > size:
                raise TruncatedRecord(offset)
            flags.append(flag != 0.0)
            offset += _HOG_HEAD.size + body
            fh.seek(offset)
    return flags
