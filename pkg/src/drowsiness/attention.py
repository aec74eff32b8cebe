"""Eyelid-closure (PERCLOS) metrics, drowsiness-scale labels and head-centroid tracking."""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import EmptyTrack, InvalidScale, SeriesTooShort


class Label(str, enum.Enum):
    ALERT = "Alert"
    LOW_VIGILANCE = "LowVigilance"
    DROWSY = "Drowsy"
    UNLABELED = "Unlabeled"

    @property
    def index(self) -> int:
        return CLASSES.index(self)


# Class order used for confusion matrices, voting ties and reports.
CLASSES: tuple[Label, ...] = (Label.ALERT, Label.LOW_VIGILANCE, Label.DROWSY)


def classify_scale(scale_value: int) -> Label:
    """Map a 1-9 self-reported drowsiness score to its class.

    1-3 Alert, 6-7 LowVigilance, 8-9 Drowsy; 4 and 5 carry no class.
    """
    if isinstance(scale_value, bool) or int(scale_value) != scale_value or not 1 <= scale_value <= 9:
        raise InvalidScale(f"scale value must be an integer in 1..9, got {scale_value!r}")
    if scale_value <= 3:
        return Label.ALERT
    if scale_value <= 5:
        return Label.UNLABELED
    if scale_value <= 7:
        return Label.LOW_VIGILANCE
    return Label.DROWSY


def closure_from_au45(intensity: float) -> float:
    """AU45 (blink) intensity on the 0-5 scale -> eyelid closure fraction."""
    return intensity / 5.0


@dataclass(frozen=True)
class ClosureSeries:
    values: np.ndarray
    fps: float
    valid: np.ndarray | None = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if self.fps <= 0:
            raise ValueError("fps must be positive")
        if values.size and (values.min() < 0.0 or values.max() > 1.0):
            raise ValueError("closure values must lie in [0, 1]")
        object.__setattr__(self, "values", values)
        if self.valid is not None:
            valid = np.asarray(self.valid, dtype=bool)
            if valid.shape != values.shape:
                raise ValueError("valid mask must match values")
            object.__setattr__(self, "valid", valid)

    @classmethod
    def from_frames(cls, frames, fps: float, mode: str = "intensity") -> "ClosureSeries":
        """Build from parsed frames using AU45 intensity (default) or AU45 presence."""
        from .ingest import AU45_INTENSITY, AU45_PRESENCE

        if mode == "intensity":
            values = [closure_from_au45(f.au_intensity[AU45_INTENSITY]) for f in frames]
        elif mode == "presence":
            values = [float(f.au_presence[AU45_PRESENCE]) for f in frames]
        else:
            raise ValueError(f"unknown closure mode {mode!r}")
        return cls(np.array(values, dtype=np.float64), fps, np.array([f.success for f in frames], dtype=bool))


@dataclass(frozen=True)
class PerclosReport:
    window_start_s: float
    window_end_s: float
    p70: float
    p80: float
    em: float
    invalid_fraction: float = 0.0

    @property
    def reliable(self) -> bool:
        return self.invalid_fraction <= 0.5


def perclos(series: ClosureSeries, window_s: float = 60.0, stride_s: float | None = None) -> list[PerclosReport]:
    """Sliding-window P70 / P80 / EM.

    p70 and p80 are the fractions of valid frames with closure >= 0.7 and
    >= 0.8; em is the mean squared closure. Frames flagged invalid are left
    out of all three and reported through ``invalid_fraction``. A window with
    no valid frame reports zeros (and is unreliable by construction).
    """
    if window_s <= 0:
        raise ValueError("window_s must be positive")
    stride_s = window_s if stride_s is None else stride_s
    if stride_s <= 0:
        raise ValueError("stride_s must be positive")
    n = series.values.size
    win = int(round(window_s * series.fps))
    step = max(1, int(round(stride_s * series.fps)))
    if win < 1 or n < win:
        raise SeriesTooShort(f"{n} frames cannot fill a {window_s:g} s window at {series.fps:g} fps ({win} frames)")

    values = series.values
    valid = series.valid if series.valid is not None else np.ones(n, dtype=bool)
    reports = []
    for start in range(0, n - win + 1, step):
        v = values[start:start + win][valid[start:start + win]]
        n_valid = v.size
        if n_valid:
            p70 = np.count_nonzero(v >= 0.7) / n_valid
            p80 = np.count_nonzero(v >= 0.8) / n_valid
            em = float(np.sum(v * v)) / n_valid
        else:
            p70 = p80 = em = 0.0
        reports.append(PerclosReport(
            window_start_s=start / series.fps,
            window_end_s=(start + win) / series.fps,
            p70=p70, p80=p80, em=em,
            invalid_fraction=(win - n_valid) / win,
        ))
    return reports


PERCLOS_COLUMNS = ("window_start_s", "window_end_s", "p70", "p80", "em", "invalid_fraction")


def perclos_csv(reports: Iterable[PerclosReport]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(PERCLOS_COLUMNS)
    for r in reports:
        writer.writerow([repr(float(getattr(r, c))) for c in PERCLOS_COLUMNS])
    return buf.getvalue()


def centroid_deviation(positions: Sequence[Sequence[float]], mode: str = "running") -> list[float]:
    """Euclidean distance of each head centroid from the average centroid.

    ``mode="running"`` uses the mean of positions 0..i (streamable);
    ``mode="global"`` uses the mean over the whole track.
    """
    pts = np.asarray(positions, dtype=np.float64).reshape(-1, 2) if len(positions) else np.empty((0, 2))
    if pts.shape[0] == 0:
        raise EmptyTrack("centroid track is empty")
    if mode == "running":
        means = np.cumsum(pts, axis=0) / np.arange(1, pts.shape[0] + 1)[:, None]
    elif mode == "global":
        means = np.broadcast_to(pts.mean(axis=0), pts.shape)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return [math.hypot(dx, dy) for dx, dy in (pts - means)]
