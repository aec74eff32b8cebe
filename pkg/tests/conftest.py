import numpy as np
import pytest

from drowsiness.ingest import INTENSITY_AUS, PRESENCE_AUS, FrameFeatures

HEADER = (["frame", " timestamp", " confidence", " success"]
          + [f" {au}_r" for au in INTENSITY_AUS] + [f" {au}_c" for au in PRESENCE_AUS])


def au_csv(rows: list[dict]) -> bytes:
    """OpenFace-style CSV (with the leading spaces real exports carry); unset AUs are 0."""
    lines = [",".join(HEADER)]
    for k, r in enumerate(rows):
        cells = [str(r.get("frame", k + 1)), str(r.get("timestamp", k / 30)), str(r.get("confidence", 0.98)),
                 str(r.get("success", 1))]
        cells += [str(r.get(f"{au}_r", 0.0)) for au in INTENSITY_AUS]
        cells += [str(r.get(f"{au}_c", 0)) for au in PRESENCE_AUS]
        lines.append(", ".join(cells))
    return ("\n".join(lines) + "\n").encode()


def frame(idx=0, au45=0.0, hog=None, success=True, intensity=None, presence=None) -> FrameFeatures:
    inten = list(intensity) if intensity is not None else [0.0] * 17
    inten[INTENSITY_AUS.index("AU45")] = au45 if intensity is None else inten[INTENSITY_AUS.index("AU45")]
    return FrameFeatures(idx, idx / 30, 0.98, success, tuple(inten),
                         tuple(presence) if presence is not None else (0,) * 18,
                         None if hog is None else np.asarray(hog, dtype=np.float32))


@pytest.fixture
def make_frame():
    return frame


@pytest.fixture
def make_au_csv():
    return au_csv


@pytest.fixture
def synthetic_root(tmp_path):
    from drowsiness.synthetic import make_synthetic_dataset
    return make_synthetic_dataset(tmp_path / "data", n_subjects=2, n_frames=400, hog_shape=(2, 2, 4), seed=3)


# acceptance lines, filled by test_acceptance.py and printed after the run
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
