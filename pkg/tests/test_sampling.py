import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from drowsiness.errors import InvalidCount
from drowsiness.sampling import (SubsetSpec, WindowSample, assign_folds, equally_dispersed_timestamps,
                                 make_windows, pick_frames, split_train_test)


def test_timestamps_endpoints():
    assert equally_dispersed_timestamps(1440, 14000, 2) == [1440, 14000]


def test_timestamps_five():
    assert equally_dispersed_timestamps(1440, 14000, 5) == [1440, 4580, 7720, 10860, 14000]


def test_timestamps_default_range():
    ts = equally_dispersed_timestamps(1440, 14000, 1000)
    assert len(ts) == 1000 and ts[0] == 1440 and ts[-1] == 14000
    gaps = np.diff(ts)
    assert gaps.max() - gaps.min() <= 1


def test_timestamps_rounding_matches_float_oracle():
    # independent: float arithmetic rounded half-up
    for lo, hi, n in [(0, 10, 4), (1440, 14000, 7), (3, 1000, 333)]:
        expected = [int(np.floor(lo + i * (hi - lo) / (n - 1) + 0.5)) for i in range(n)]
        assert equally_dispersed_timestamps(lo, hi, n) == expected


@given(st.integers(0, 10_000), st.integers(1, 20_000), st.integers(2, 500))
@settings(max_examples=200, deadline=None)
def test_timestamp_dispersion_property(lo, span, n):
    ts = equally_dispersed_timestamps(lo, lo + span, n)
    gaps = np.diff(ts)
    assert ts[0] == lo and ts[-1] == lo + span
    assert (gaps >= 0).all() and gaps.max() - gaps.min() <= 1


def test_timestamps_count_error():
    with pytest.raises(InvalidCount):
        equally_dispersed_timestamps(0, 10, 1)


def test_pick_singleton_bins():
    ts = [10, 20, 30, 40]
    assert pick_frames(ts, ts, seed=5) == ts


def test_pick_deterministic():
    avail = [100, 101, 102, 200]
    a = pick_frames(avail, [100, 103], seed=7)
    b = pick_frames(avail, [100, 103], seed=7)
    assert a == b and a[0] in (100, 101, 102)


def test_pick_uses_every_frame_in_bin():
    seen = {pick_frames([100, 101, 102], [100, 103], seed=s)[0] for s in range(60)}
    assert seen == {100, 101, 102}


def test_pick_empty_bin_nearest_frame():
    # bin [200, 210) is empty; 190 is 10 away from 200, 211 is 11 away
    assert pick_frames([190, 211], [200, 210], seed=0)[0] == 190


def test_pick_empty_bin_tie_to_lower():
    assert pick_frames([190, 210], [200, 205], seed=0)[0] == 190


def test_pick_last_bin_closed_at_frame_max():
    picks = {pick_frames([5, 9, 10], [0, 9], seed=s, frame_max=10)[1] for s in range(40)}
    assert picks == {9, 10}


def _rec(make_frame, ids):
    return [make_frame(i) for i in ids]


def test_window_boundary(make_frame):
    res = make_windows(_rec(make_frame, range(28)), [27], 28)
    assert len(res) == 1 and res.dropped == 0
    w = res.samples[0]
    assert [f.frame_index for f in w.frames] == list(range(28))


def test_window_insufficient_history(make_frame):
    res = make_windows(_rec(make_frame, range(28)), [26], 28)
    assert len(res) == 0 and res.dropped == 1


def test_window_index_arithmetic(make_frame):
    res = make_windows(_rec(make_frame, range(13900, 14001)), [14000], 28)
    assert res.samples[0].frames[0].frame_index == 13973
    assert res.samples[0].frames[-1].frame_index == 14000


def test_window_gap_dropped(make_frame):
    ids = list(range(0, 10)) + list(range(11, 40))
    res = make_windows(_rec(make_frame, ids), [30, 39], 28)
    assert [s.anchor_frame for s in res] == [39] and res.dropped == 1


@given(st.lists(st.integers(0, 200), max_size=30), st.integers(1, 40))
@settings(max_examples=80, deadline=None)
def test_windows_consecutive_property(anchors, window_len):
    from conftest import frame
    rec = [frame(i) for i in range(150)]
    res = make_windows(rec, anchors, window_len)
    assert len(res) + res.dropped == len(anchors)
    for s in res:
        idx = [f.frame_index for f in s.frames]
        assert len(idx) == window_len and idx[-1] == s.anchor_frame
        assert idx == list(range(idx[0], idx[0] + window_len))


def _samples(anchors):
    return [WindowSample(a, ()) for a in anchors]


def test_split_boundary():
    train, test = split_train_test(_samples([9999, 10000]), 10000)
    assert [s.anchor_frame for s in train] == [9999] and [s.anchor_frame for s in test] == [10000]


def test_split_all_train():
    train, test = split_train_test(_samples([1, 2, 3]), 10000)
    assert len(train) == 3 and test == []


@given(st.lists(st.integers(0, 20000), max_size=60), st.integers(1, 19999))
@settings(max_examples=100, deadline=None)
def test_split_partition_property(anchors, split):
    samples = _samples(anchors)
    train, test = split_train_test(samples, split)
    assert len(train) + len(test) == len(samples)
    assert not {id(s) for s in train} & {id(s) for s in test}


def test_split_ratio_of_dispersed_anchors():
    # Anchors at the dispersed timestamps themselves: the fraction below the
    # split follows from the frame range alone.
    ts = equally_dispersed_timestamps(1440, 14000, 1000)
    train, test = split_train_test(_samples(ts * 3), 10000)
    assert len(train) + len(test) == 3000
    assert len(train) == 3 * sum(t < 10000 for t in ts)


def test_folds_sixty_subjects():
    fa = assign_folds([f"s{i:02d}" for i in range(60)], 12, seed=1)
    sizes = np.bincount(list(fa.fold_of_subject.values()))
    assert sizes.tolist() == [12] * 5 and fa.n_folds == 5


def test_folds_small():
    fa = assign_folds(["a", "b", "c", "d", "e"], 12, seed=0)
    assert set(fa.fold_of_subject.values()) == {0} and len(fa.fold_of_subject) == 5


def test_folds_deterministic_and_seeded():
    subjects = [f"s{i}" for i in range(30)]
    assert assign_folds(subjects, 12, 3).fold_of_subject == assign_folds(subjects, 12, 3).fold_of_subject
    assert assign_folds(subjects, 12, 3).fold_of_subject != assign_folds(subjects, 12, 4).fold_of_subject


@given(st.integers(1, 100), st.integers(1, 20))
@settings(max_examples=50, deadline=None)
def test_fold_sizes_property(n, size):
    fa = assign_folds([str(i) for i in range(n)], size, seed=0)
    counts = np.bincount(list(fa.fold_of_subject.values()))
    assert (counts[:-1] == size).all() and 1 <= counts[-1] <= size


def test_subset_spec_validation():
    with pytest.raises(InvalidCount):
        SubsetSpec(frame_min=100, split_frame=50, frame_max=200)
