"""Synthetic OpenFace-style recordings with class-dependent feature distributions.

Used by the tests, the acceptance suite and the benchmark; real exports are
not redistributable.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .ingest import INTENSITY_AUS, PRESENCE_AUS, HogFrame, write_hog

# One scale value per class: Alert, LowVigilance, Drowsy.
CLASS_SCALES = (2, 6, 9)
# AU noise is narrower than HOG noise so intensities stay mostly inside 0-5.
AU_SIGMA_RATIO = 0.3


def _au_csv_text(frame_ids, fps, intensity, presence, success) -> str:
    header = ["frame", "timestamp", "confidence", "success"]
    header += [f"{au}_r" for au in INTENSITY_AUS] + [f"{au}_c" for au in PRESENCE_AUS]
    lines = [",".join(header)]
    for k, f in enumerate(frame_ids):
        cells = [str(f), f"{(f - 1) / fps:.3f}", "0.98" if success[k] else "0.0", str(int(success[k]))]
        cells += [f"{v:.2f}" for v in intensity[k]] + [str(int(v)) for v in presence[k]]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def class_means(n_classes: int, dim: int, separation: float, sigma: float, rng) -> np.ndarray:
    """Class centres whose pairwise distances are all >= separation * sigma."""
    directions = rng.normal(size=(n_classes, dim))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    # scale so the closest pair sits at the requested distance
    d = min(np.linalg.norm(directions[a] - directions[b]) for a in range(n_classes) for b in range(a))
    return directions * (separation * sigma / d)


def make_recording(cls: int, n_frames: int, au_means, hog_means, sigma: float, rng,
                   hog_shape: tuple[int, int, int] | None, fps: float, start_frame: int = 1):
    frame_ids = np.arange(start_frame, start_frame + n_frames)
    intensity = np.clip(2.5 + au_means[cls] + AU_SIGMA_RATIO * sigma * rng.normal(size=(n_frames, len(INTENSITY_AUS))), 0.0, 5.0)
    # presence follows intensity; AU28 (intensity-less) copies the AU26 column
    pres = intensity >= 2.5
    presence = np.column_stack([pres[:, :16], pres[:, 15], pres[:, 16]]).astype(int)
    success = np.ones(n_frames, dtype=bool)
    au_text = _au_csv_text(frame_ids, fps, intensity, presence, success)
    hog_bytes = None
    if hog_shape is not None:
        cols, rows, chans = hog_shape
        vals = (hog_means[cls] + sigma * rng.normal(size=(n_frames, cols * rows * chans))).astype(np.float32)
        hog_bytes = write_hog(HogFrame(i, cols, rows, chans, vals[i], 1.0) for i in range(n_frames))
    return au_text, hog_bytes


def make_synthetic_dataset(root, n_subjects: int = 2, n_frames: int = 1200,
                           hog_shape: tuple[int, int, int] | None = (4, 4, 8), separation: float = 3.0,
                           sigma: float = 1.0, seed: int = 0, fps: float = 30.0) -> Path:
    """Write ``<root>/sNN/<scale>.csv`` (+ ``.hog``) for every subject and class.

    Per-frame features are Gaussian around class centres that are
    ``separation`` standard deviations apart, for AU and HOG alike.
    """
    root = Path(root)
    rng = np.random.default_rng(seed)
    au_means = class_means(3, len(INTENSITY_AUS), separation, AU_SIGMA_RATIO * sigma, rng)
    hog_dim = int(np.prod(hog_shape)) if hog_shape else 0
    hog_means = class_means(3, hog_dim, separation, sigma, rng) if hog_shape else None
    for s in range(n_subjects):
        subject = root / f"s{s + 1:02d}"
        subject.mkdir(parents=True, exist_ok=True)
        for cls, scale in enumerate(CLASS_SCALES):
            au_text, hog_bytes = make_recording(cls, n_frames, au_means, hog_means, sigma, rng,
                                                hog_shape, fps)
            (subject / f"{scale}.csv").write_text(au_text)
            if hog_bytes is not None:
                (subject / f"{scale}.hog").write_bytes(hog_bytes)
    return root
