"""End-to-end stages behind the CLI: index, subset, featurize, train-eval, perclos, bench."""

from __future__ import annotations

import csv
import io
import json
import logging
import os
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any

import numpy as np

from .attention import CLASSES, ClosureSeries, Label, perclos, perclos_csv
from .classify import ForestParams, KernelSpec, SvmParams, TrainedClassifier, train_multiclass, train_random_forest
from .classify import persist
from .errors import DrowsinessError, FormatError, InsufficientFrames, UsageError
from .evaluate import evaluate, time_predictions
from .features import AttributeSet, FeatureSpec, fit_scaler, read_matrix, window_vector, write_matrix
from .ingest import DatasetIndex, Layout, RecordingMeta, hog_validity, load_recording, parse_au_csv, scan_dataset
from .sampling import (SubsetSpec, assign_folds, equally_dispersed_timestamps, make_windows, pick_in_bin,
                       split_train_test)

log = logging.getLogger(__name__)

SUBSET_FORMAT = "drowsiness-subset/1"
REPORT_COLUMNS = ("attributes", "kernel", "precision", "recall", "test_acc", "time_ms", "time_p95_ms",
                  "n_train", "n_test", "status", "error")
LATENCY_FIELDS = ("time_ms", "time_p95_ms")


def default_grid() -> list[dict[str, Any]]:
    """Random forest plus the four SVM kernels, in report order."""
    return [
        {"name": "RFC", "type": "forest"},
        {"name": "Linear", "type": "svm", "kernel": {"kind": "linear"}},
        {"name": "Polynomial", "type": "svm", "kernel": {"kind": "polynomial", "degree": 3, "coef0": 0.0}},
        {"name": "Sigmoid", "type": "svm", "kernel": {"kind": "sigmoid", "coef0": 0.0}},
        {"name": "Gaussian", "type": "svm", "kernel": {"kind": "rbf"}},
    ]


@dataclass
class RunConfig:
    dataset_root: str | None = None
    layout: str | None = None
    subset: SubsetSpec = field(default_factory=SubsetSpec)
    features: list[FeatureSpec] = field(default_factory=lambda: [FeatureSpec(a) for a in AttributeSet])
    classifiers: list[dict[str, Any]] = field(default_factory=default_grid)
    out: str = "out"
    seed: int = 0
    window_s: float = 60.0
    stride_s: float | None = None
    closure_mode: str = "intensity"
    repeats: int = 1

    @classmethod
    def from_json(cls, doc: dict[str, Any]) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise UsageError(f"unknown config key(s): {sorted(unknown)}")
        kw = dict(doc)
        try:
            if "subset" in kw:
                kw["subset"] = SubsetSpec(**kw["subset"])
            if "features" in kw:
                kw["features"] = [FeatureSpec(**f) if isinstance(f, dict) else FeatureSpec(f) for f in kw["features"]]
        except (TypeError, ValueError) as exc:
            raise UsageError(f"bad config: {exc}") from None
        cfg = cls(**kw)
        for p in (cfg.dataset_root, cfg.layout):
            if p is not None and not Path(p).exists():
                raise UsageError(f"config path does not exist: {p}")
        return cfg

    @classmethod
    def load(cls, path: str | None) -> "RunConfig":
        if path is None:
            return cls()
        try:
            return cls.from_json(json.loads(Path(path).read_text()))
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {path}: {exc}") from None


def _dump(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _write(path: Path, text: str | bytes):
    path.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(text, bytes):
        path.write_bytes(text)
    else:
        path.write_text(text)


# ------------------------------------------------------------------ index

def run_index(root: str, layout_path: str | None, out: Path) -> DatasetIndex:
    index = scan_dataset(root, Layout.load(layout_path))
    _write(out / "index.json", index.to_json())
    log.info("indexed %d recording(s)", len(index.recordings))
    return index


# ----------------------------------------------------------------- subset

def _available_frames(index: DatasetIndex, rec: RecordingMeta, spec: SubsetSpec) -> list[int]:
    """Successfully tracked frames in range whose full window history is present."""
    with open(index.resolve(rec.au_path), "rb") as fh:
        frames = parse_au_csv(fh).frames
    ok = [f.success for f in frames]
    if rec.hog_path is not None:
        flags = hog_validity(index.resolve(rec.hog_path))
        ok = [a and (k < len(flags) and flags[k]) for k, a in enumerate(ok)]
    ids = [f.frame_index for f in frames]
    out = []
    for k, fid in enumerate(ids):
        if not (spec.frame_min <= fid <= spec.frame_max and ok[k]):
            continue
        first = k - spec.window_len + 1
        if first >= 0 and ids[first] == fid - spec.window_len + 1:
            out.append(fid)
    return out


def build_subset(index: DatasetIndex, spec: SubsetSpec) -> dict[str, Any]:
    """Pick per_class anchors per class, window them, split and assign folds.

    Timestamps are pooled per class and handed to the class's recordings
    round-robin (recordings ordered by subject, then scale).
    """
    samples: list[dict[str, Any]] = []
    shortfall: dict[str, int] = {}
    dropped = 0
    for ci, label in enumerate(CLASSES):
        recs = [(k, r) for k, r in enumerate(index.recordings) if r.label is label]
        avail = {k: _available_frames(index, r, spec) for k, r in recs}
        pool = sum(len(a) for a in avail.values())
        if pool < spec.per_class:
            raise InsufficientFrames(f"class {label.value}: {pool} usable frame(s) for a quota of {spec.per_class}")
        usable = [(k, r) for k, r in recs if avail[k]]
        if spec.per_class >= 2:
            ts = equally_dispersed_timestamps(spec.frame_min, spec.frame_max, spec.per_class)
        else:
            ts = [spec.frame_min]
        rng = np.random.default_rng([spec.seed, ci])
        picks: dict[int, list[int]] = {}
        for i, t in enumerate(ts):
            k, _ = usable[i % len(usable)]
            last = i + 1 == len(ts)
            hi = spec.frame_max if last else ts[i + 1]
            picks.setdefault(k, []).append(pick_in_bin(avail[k], t, hi, rng, closed=last))
        produced = 0
        for k, anchors in sorted(picks.items()):
            rec = index.recordings[k]
            with open(index.resolve(rec.au_path), "rb") as fh:
                frames = parse_au_csv(fh).frames
            windows = make_windows(frames, anchors, spec.window_len, label, rec.subject_id)
            dropped += windows.dropped
            produced += len(windows)
            for w in windows:
                samples.append({"recording": k, "subject": rec.subject_id, "scale": rec.scale_value,
                                "label": label.value, "anchor_frame": w.anchor_frame})
        shortfall[label.value] = spec.per_class - produced

    train, _ = split_train_test(samples, spec.split_frame, anchor=lambda s: s["anchor_frame"])
    train_ids = {id(s) for s in train}
    layout_folds = {r.subject_id: r.fold for r in index.recordings}
    if index.recordings and all(f is not None for f in layout_folds.values()):
        fold_of = layout_folds
    elif samples:
        fold_of = assign_folds(sorted({r.subject_id for r in index.recordings}), spec.fold_size, spec.seed).fold_of_subject
    else:
        fold_of = {}
    for s in samples:
        s["split"] = "train" if id(s) in train_ids else "test"
        s["fold"] = fold_of.get(s["subject"])
    n_train = sum(s["split"] == "train" for s in samples)
    return {
        "format": SUBSET_FORMAT,
        "spec": asdict(spec),
        "index": json.loads(index.to_json()),
        "samples": samples,
        "n_train": n_train,
        "n_test": len(samples) - n_train,
        "shortfall": shortfall,
        "dropped_windows": dropped,
        "folds": {k: fold_of[k] for k in sorted(fold_of)},
    }


def load_index(path: str | Path) -> DatasetIndex:
    try:
        return DatasetIndex.from_json(Path(path).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read index {path}: {exc}") from None


def load_subset(path: str | Path) -> dict[str, Any]:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read subset manifest {path}: {exc}") from None
    if doc.get("format") != SUBSET_FORMAT:
        raise FormatError(f"not a subset manifest: {path}")
    return doc


def run_subset(index_path, spec: SubsetSpec, out: Path) -> dict[str, Any]:
    doc = build_subset(load_index(index_path), spec)
    _write(out / "subset.json", _dump(doc))
    for label, short in doc["shortfall"].items():
        if short > 0:
            log.warning("class %s is %d sample(s) short of its quota", label, short)
    return doc


# -------------------------------------------------------------- featurize

def featurize(subset: dict[str, Any], specs: list[FeatureSpec]) -> dict[str, np.ndarray]:
    """Window-averaged feature matrix per spec tag; rows follow the manifest's sample order."""
    index = DatasetIndex.from_json(json.dumps(subset["index"]))
    window_len = subset["spec"]["window_len"]
    need_hog = any(s.uses_hog for s in specs)
    by_rec: dict[int, list[int]] = {}
    for row, s in enumerate(subset["samples"]):
        by_rec.setdefault(s["recording"], []).append(row)
    n = len(subset["samples"])
    mats: dict[str, np.ndarray | None] = {s.tag: None for s in specs}
    for k in sorted(by_rec):
        frames = load_recording(index, index.recordings[k], with_hog=need_hog)
        rows = by_rec[k]
        windows = make_windows(frames, [subset["samples"][r]["anchor_frame"] for r in rows], window_len)
        if windows.dropped:
            raise FormatError(f"recording {index.recordings[k].au_path} no longer matches the subset manifest")
        for spec in specs:
            for r, w in zip(rows, windows):
                v = window_vector(w, spec)
                if mats[spec.tag] is None:
                    mats[spec.tag] = np.empty((n, v.size))
                mats[spec.tag][r] = v
    return {tag: (m if m is not None else np.empty((0, 0))) for tag, m in mats.items()}


def _feature_file(out: Path, spec: FeatureSpec) -> Path:
    suffix = "" if spec.include_presence else "_nopresence"
    return out / "features" / f"{spec.attribute_set.value}{suffix}.dfm"


def run_featurize(subset_path, specs: list[FeatureSpec], out: Path) -> dict[str, np.ndarray]:
    subset = load_subset(subset_path)
    mats = featurize(subset, specs)
    for spec in specs:
        _write(_feature_file(out, spec), write_matrix(mats[spec.tag], spec))
    return mats


# ------------------------------------------------------------- train-eval

def _make_classifier(cfg: dict[str, Any], seed: int):
    kind = cfg.get("type")
    if kind == "forest":
        params = ForestParams(**{"seed": seed, **cfg.get("params", {})})
        return "forest", params
    if kind == "svm":
        kernel = KernelSpec(**cfg.get("kernel", {}))
        params = SvmParams(**{"seed": seed, **cfg.get("params", {})})
        return "svm", (kernel, params)
    raise UsageError(f"classifier {cfg.get('name')!r}: unknown type {kind!r}")


def train_eval_one(X_train, y_train, X_test, y_test, spec: FeatureSpec, clf_cfg: dict[str, Any],
                   seed: int, repeats: int = 1) -> tuple[dict[str, Any], TrainedClassifier]:
    kind, params = _make_classifier(clf_cfg, seed)
    standardize = spec.standardize if spec.standardize is not None else kind == "svm"
    scaler = fit_scaler(X_train) if standardize else None
    Xtr = scaler.apply(X_train) if scaler else X_train
    Xte = scaler.apply(X_test) if scaler else X_test
    classes = [c for c in CLASSES if c in set(y_train)]
    if kind == "forest":
        model = train_random_forest(Xtr, y_train, params, classes=classes)
    else:
        model = train_multiclass(Xtr, y_train, params[0], params[1], classes=classes)
    preds = model.predict(Xte) if len(Xte) else []
    report_classes = [c for c in CLASSES if c in set(y_train) | set(y_test)]
    latency = time_predictions(lambda x: model.predict(x[None, :]), list(Xte), repeats) if len(Xte) else None
    ev = evaluate(preds, list(y_test), report_classes, latency) if len(Xte) else None
    row = {
        "attributes": spec.attribute_set.value, "kernel": clf_cfg["name"],
        "precision": ev.weighted_precision if ev else None, "recall": ev.weighted_recall if ev else None,
        "test_acc": ev.accuracy if ev else None,
        "time_ms": latency.mean_ms if latency else None, "time_p95_ms": latency.p95_ms if latency else None,
        "n_train": len(Xtr), "n_test": len(Xte), "status": "ok", "error": "",
    }
    if ev:
        row["confusion"] = ev.confusion.counts.tolist()
    return row, TrainedClassifier(model, spec, scaler)


def run_train_eval(subset_path, cfg: RunConfig, out: Path) -> list[dict[str, Any]]:
    """Train and score every (attribute set x classifier) pair; failures become error rows."""
    subset = load_subset(subset_path)
    samples = subset["samples"]
    labels = np.array([Label(s["label"]) for s in samples], dtype=object)
    is_train = np.array([s["split"] == "train" for s in samples], dtype=bool)
    rows = []
    for spec in cfg.features:
        try:
            X = _load_or_compute(subset, spec, out)
        except DrowsinessError as exc:
            X = exc
        for clf_cfg in cfg.classifiers:
            base = {c: None for c in REPORT_COLUMNS}
            base.update(attributes=spec.attribute_set.value, kernel=clf_cfg.get("name", "?"))
            try:
                if isinstance(X, Exception):
                    raise X
                row, trained = train_eval_one(X[is_train], list(labels[is_train]), X[~is_train],
                                              list(labels[~is_train]), spec, clf_cfg, cfg.seed, cfg.repeats)
                persist.save(trained, _model_path(out, spec, clf_cfg["name"]))
            except (DrowsinessError, ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
                log.error("%s / %s failed: %s", base["attributes"], base["kernel"], exc)
                row = {**base, "status": "error", "error": f"{type(exc).__name__}: {exc}"}
            rows.append(row)
    write_report(rows, out)
    return rows


def _model_path(out: Path, spec: FeatureSpec, name: str) -> Path:
    p = out / "models" / f"{_feature_file(out, spec).stem}__{name}.json"
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


def _load_or_compute(subset, spec: FeatureSpec, out: Path) -> np.ndarray:
    path = _feature_file(out, spec)
    if path.exists():
        X, tag = read_matrix(path.read_bytes())
        if tag == spec.tag and X.shape[0] == len(subset["samples"]):
            return X
        log.warning("ignoring stale feature file %s", path)
    return featurize(subset, [spec])[spec.tag]


def write_report(rows: list[dict[str, Any]], out: Path):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(REPORT_COLUMNS)
    for r in rows:
        w.writerow(["" if r.get(c) is None else (repr(r[c]) if isinstance(r[c], float) else r[c])
                    for c in REPORT_COLUMNS])
    _write(out / "report.csv", buf.getvalue())
    _write(out / "report.json", _dump({"rows": rows}))


# ---------------------------------------------------------------- perclos

def run_perclos(index_path, window_s: float, stride_s: float | None, mode: str, out: Path) -> dict[str, Any]:
    index = load_index(index_path)
    summary: dict[str, Any] = {"window_s": window_s, "stride_s": stride_s, "mode": mode, "recordings": []}
    for rec in index.recordings:
        name = f"{rec.subject_id}_{rec.scale_value}"
        entry = {"subject": rec.subject_id, "scale": rec.scale_value, "file": None, "error": None}
        try:
            frames = load_recording(index, rec, with_hog=False)
            reports = perclos(ClosureSeries.from_frames(frames, index.fps, mode), window_s, stride_s)
            path = out / "perclos" / f"{name}.csv"
            _write(path, perclos_csv(reports))
            entry["file"] = path.relative_to(out).as_posix()
            entry["windows"] = len(reports)
        except DrowsinessError as exc:
            entry["error"] = f"{type(exc).__name__}: {exc}"
            log.error("%s: %s", name, exc)
        summary["recordings"].append(entry)
    _write(out / "perclos" / "summary.json", _dump(summary))
    return summary


# ------------------------------------------------------------------ bench

def run_bench(model_path, features_path, repeats: int, out: Path | None) -> dict[str, Any]:
    try:
        clf = persist.load(model_path)
        X, tag = read_matrix(Path(features_path).read_bytes())
    except OSError as exc:
        raise UsageError(str(exc)) from None
    if clf.feature_spec is not None and tag != clf.feature_spec.tag:
        raise FormatError(f"model expects features {clf.feature_spec.tag!r}, file holds {tag!r}")
    Xs = clf.transform(X) if len(X) else X
    model = clf.model
    stats = time_predictions(lambda x: model.predict(x[None, :]), list(Xs), repeats)
    doc = {"model": str(model_path), "features": tag, "samples": int(X.shape[0]), "repeats": repeats,
           "calls": stats.n_calls, "mean_ms": stats.mean_ms, "p95_ms": stats.p95_ms,
           "unit": "milliseconds per single-sample prediction"}
    if out is not None:
        _write(out / "bench.json", _dump(doc))
    return doc
