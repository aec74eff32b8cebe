"""Subset construction: dispersed timestamps, seeded frame picks, windows, split and folds."""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .attention import Label
from .errors import InvalidCount
from .ingest import FrameFeatures


@dataclass(frozen=True)
class SubsetSpec:
    frame_min: int = 1440
    frame_max: int = 14000
    per_class: int = 1000
    split_frame: int = 10000
    window_len: int = 28
    seed: int = 0
    fold_size: int = 12

    def __post_init__(self):
        if not self.frame_min < self.split_frame < self.frame_max:
            raise InvalidCount("need frame_min < split_frame < frame_max")
        if self.window_len < 1 or self.per_class < 1 or self.fold_size < 1:
            raise InvalidCount("window_len, per_class and fold_size must be >= 1")


@dataclass(frozen=True)
class WindowSample:
    anchor_frame: int
    frames: tuple[FrameFeatures, ...]
    label: Label | None = None
    subject_id: str = ""


@dataclass
class FoldAssignment:
    fold_of_subject: dict[str, int]
    fold_size: int = 12

    @property
    def n_folds(self) -> int:
        return max(self.fold_of_subject.values(), default=-1) + 1


def equally_dispersed_timestamps(frame_min: int, frame_max: int, n: int) -> list[int]:
    """n integer frame positions from frame_min to frame_max inclusive, evenly spaced.

    Rounds half up using exact integer arithmetic, so endpoints are exact and
    consecutive gaps differ by at most one frame.
    """
    if n < 2:
        raise InvalidCount(f"need at least 2 timestamps, got {n}")
    if frame_max <= frame_min:
        raise InvalidCount("frame_max must exceed frame_min")
    span, den = frame_max - frame_min, n - 1
    return [frame_min + (2 * i * span + den) // (2 * den) for i in range(n)]


def pick_in_bin(available: Sequence[int], lo: int, hi: int, rng: np.random.Generator,
                closed: bool = False) -> int:
    """Uniform pick from available frames in [lo, hi) (or [lo, hi] when closed).

    An empty bin falls back to the available frame nearest ``lo``, ties to the lower index.
    """
    a = bisect.bisect_left(available, lo)
    b = bisect.bisect_right(available, hi) if closed else bisect.bisect_left(available, hi)
    if b > a:
        return available[a + int(rng.integers(b - a))]
    candidates = [available[k] for k in (a - 1, a) if 0 <= k < len(available)]
    return min(candidates, key=lambda f: (abs(f - lo), f))


def pick_frames(available: Sequence[int], timestamps: Sequence[int], seed: int,
                frame_max: int | None = None) -> list[int]:
    """One seeded random frame per timestamp bin [t_i, t_{i+1}).

    The last bin is [t_last, frame_max] (just [t_last] when frame_max is None).
    """
    if not available:
        raise InvalidCount("no available frames")
    available = sorted(available)
    rng = np.random.default_rng(seed)
    picks = []
    for i, t in enumerate(timestamps):
        if i + 1 < len(timestamps):
            picks.append(pick_in_bin(available, t, timestamps[i + 1], rng))
        else:
            picks.append(pick_in_bin(available, t, t if frame_max is None else max(t, frame_max), rng, closed=True))
    return picks


@dataclass
class WindowResult:
    samples: list[WindowSample]
    dropped: int = 0

    def __iter__(self):
        return iter(self.samples)

    def __len__(self):
        return len(self.samples)


def make_windows(recording: Sequence[FrameFeatures], anchors: Sequence[int], window_len: int = 28,
                 label: Label | None = None, subject_id: str = "") -> WindowResult:
    """Anchor frame plus its window_len-1 predecessors; short or gappy histories are dropped."""
    pos = {f.frame_index: i for i, f in enumerate(recording)}
    samples, dropped = [], 0
    for anchor in anchors:
        i = pos.get(anchor)
        if i is None or i + 1 < window_len:
            dropped += 1
            continue
        frames = tuple(recording[i - window_len + 1: i + 1])
        if frames[0].frame_index != anchor - window_len + 1:
            dropped += 1
            continue
        samples.append(WindowSample(anchor, frames, label, subject_id))
    return WindowResult(samples, dropped)


def split_train_test(samples: Sequence, split_frame: int = 10000, anchor=None) -> tuple[list, list]:
    """anchor_frame < split_frame trains; everything else tests.

    ``anchor`` extracts the anchor frame from a sample (default: ``.anchor_frame``).
    """
    anchor = anchor or (lambda s: s.anchor_frame)
    train = [s for s in samples if anchor(s) < split_frame]
    test = [s for s in samples if anchor(s) >= split_frame]
    return train, test


def assign_folds(subjects: Sequence[str], fold_size: int = 12, seed: int = 0) -> FoldAssignment:
    """Shuffle subjects with ``seed`` and chunk them into folds of ``fold_size``."""
    if not subjects:
        raise InvalidCount("no subjects to assign")
    order = list(dict.fromkeys(subjects))
    perm = np.random.default_rng(seed).permutation(len(order))
    return FoldAssignment({order[k]: rank // fold_size for rank, k in enumerate(perm)}, fold_size)
