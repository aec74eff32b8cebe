"""Confusion matrix, weighted precision/recall, accuracy and prediction latency."""

from __future__ import annotations

import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Hashable, Sequence

import numpy as np

from .errors import EmptyMatrix, LengthMismatch, UnknownLabel


@dataclass(frozen=True)
class ConfusionMatrix:
    counts: np.ndarray           # rows: true class, columns: predicted class
    classes: tuple

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    def permuted(self, order: Sequence[int]) -> "ConfusionMatrix":
        order = list(order)
        return ConfusionMatrix(self.counts[np.ix_(order, order)], tuple(self.classes[k] for k in order))


def confusion(preds: Sequence[Hashable], truth: Sequence[Hashable], classes: Sequence[Hashable]) -> ConfusionMatrix:
    if len(preds) != len(truth):
        raise LengthMismatch(f"{len(preds)} predictions vs {len(truth)} labels")
    pos = {c: i for i, c in enumerate(classes)}
    counts = np.zeros((len(classes), len(classes)), dtype=np.int64)
    for p, t in zip(preds, truth):
        if p not in pos or t not in pos:
            raise UnknownLabel(f"label {t if t not in pos else p!r} not in {list(classes)}")
        counts[pos[t], pos[p]] += 1
    return ConfusionMatrix(counts, tuple(classes))


def _parts(cm: ConfusionMatrix):
    c = cm.counts
    if c.sum() <= 0:
        raise EmptyMatrix("confusion matrix holds no samples")
    tp = [int(v) for v in np.diag(c)]
    w = [int(v) for v in c.sum(axis=1)]
    col = [int(v) for v in c.sum(axis=0)]
    return tp, w, col


# Exact rational arithmetic keeps weighted recall bit-identical to accuracy.

def weighted_precision(cm: ConfusionMatrix) -> float:
    """sum_i w_i * tp_i / (tp_i + fp_i) / sum_i w_i; a never-predicted class scores 0."""
    tp, w, col = _parts(cm)
    num = sum((Fraction(wi * ti, ci) for wi, ti, ci in zip(w, tp, col) if ci), Fraction(0))
    return float(num / sum(w))


def weighted_recall(cm: ConfusionMatrix) -> float:
    """sum_i w_i * tp_i / (tp_i + fn_i) / sum_i w_i (equals accuracy)."""
    tp, w, _ = _parts(cm)
    num = sum((Fraction(wi * ti, wi) for wi, ti in zip(w, tp) if wi), Fraction(0))
    return float(num / sum(w))


def accuracy(cm: ConfusionMatrix) -> float:
    tp, w, _ = _parts(cm)
    return float(Fraction(sum(tp), sum(w)))


@dataclass(frozen=True)
class LatencyStats:
    mean_ms: float
    p95_ms: float
    n_calls: int


def time_predictions(predict_one: Callable, samples: Sequence, repeats: int = 1,
                     clock: Callable[[], int] = time.perf_counter_ns) -> LatencyStats:
    """Wall-clock latency of single-sample predictions.

    One untimed warm-up pass over ``samples`` precedes ``repeats`` timed passes.
    ``predict_one`` receives one sample per call and nothing else is timed.
    """
    if len(samples) == 0:
        raise ValueError("no samples to time")
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    for s in samples:
        predict_one(s)
    durations = np.empty(repeats * len(samples))
    k = 0
    for _ in range(repeats):
        for s in samples:
            t0 = clock()
            predict_one(s)
            durations[k] = (clock() - t0) / 1e6
            k += 1
    return LatencyStats(float(durations.mean()), float(np.percentile(durations, 95)), int(durations.size))


@dataclass(frozen=True)
class EvalReport:
    confusion: ConfusionMatrix
    weighted_precision: float
    weighted_recall: float
    accuracy: float
    latency_mean_ms: float | None = None
    latency_p95_ms: float | None = None


def evaluate(preds, truth, classes, latency: LatencyStats | None = None) -> EvalReport:
    cm = confusion(preds, truth, classes)
    return EvalReport(cm, weighted_precision(cm), weighted_recall(cm), accuracy(cm),
                      latency.mean_ms if latency else None, latency.p95_ms if latency else None)
