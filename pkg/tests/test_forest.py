import numpy as np
import pytest

from drowsiness.classify import ForestParams, predict_forest, train_random_forest
from drowsiness.classify.forest import bootstrap_weights
from drowsiness.errors import SingleClassData


def clusters(rng, n=40, spread=1.0):
    centres = np.array([[0.0, 0.0], [10.0, 0.0], [0.0, 10.0]])
    X = np.vstack([c + spread * rng.normal(size=(n, 2)) for c in centres])
    y = [k for k in range(3) for _ in range(n)]
    return X, y


def test_depth_zero_predicts_majority():
    X = np.arange(10, dtype=float)[:, None]
    y = ["a"] * 8 + ["b"] * 2
    f = train_random_forest(X, y, ForestParams(n_trees=1, max_depth=0, bootstrap=False))
    assert f.predict(np.linspace(-5, 15, 30)[:, None]) == ["a"] * 30


def test_three_clusters_held_out():
    rng = np.random.default_rng(0)
    X, y = clusters(rng)
    Xt, yt = clusters(rng)
    f = train_random_forest(X, y, ForestParams(n_trees=100, seed=1))
    acc = np.mean(np.array(f.predict(Xt)) == np.array(yt))
    assert acc >= 0.95


def test_single_class():
    with pytest.raises(SingleClassData):
        train_random_forest([[0.0], [1.0]], [1, 1])


def test_same_seed_same_forest():
    rng = np.random.default_rng(2)
    X, y = clusters(rng, spread=4.0)
    a = train_random_forest(X, y, ForestParams(n_trees=10, seed=5))
    b = train_random_forest(X, y, ForestParams(n_trees=10, seed=5))
    for ta, tb in zip(a.trees, b.trees):
        np.testing.assert_array_equal(ta.feature, tb.feature)
        np.testing.assert_array_equal(ta.threshold, tb.threshold)
    probe = rng.uniform(-5, 15, size=(40, 2))
    assert a.predict(probe) == b.predict(probe)
    c = train_random_forest(X, y, ForestParams(n_trees=10, seed=6))
    assert any(ta.n_nodes != tc.n_nodes or not np.array_equal(ta.threshold, tc.threshold)
               for ta, tc in zip(a.trees, c.trees))


def test_leaf_histograms_sum_to_training_count():
    rng = np.random.default_rng(3)
    X, y = clusters(rng, spread=5.0)
    f = train_random_forest(X, y, ForestParams(n_trees=5, seed=0))
    for t, tree in enumerate(f.trees):
        w = bootstrap_weights(len(y), 0, t)
        leaves = tree.leaves()
        assert tree.value[leaves].sum() == w.sum()
        # every internal node's histogram is the sum of its children's
        inner = np.flatnonzero(tree.feature >= 0)
        np.testing.assert_array_equal(tree.value[inner], tree.value[tree.left[inner]] + tree.value[tree.right[inner]])


def test_training_accuracy_monotone_in_depth():
    rng = np.random.default_rng(4)
    X, y = clusters(rng, spread=6.0)
    y = np.array(y)
    w = bootstrap_weights(len(y), 11, 0)
    accs = []
    for depth in range(0, 12):
        f = train_random_forest(X, list(y), ForestParams(n_trees=1, max_depth=depth, seed=11))
        pred = np.array(f.predict(X))
        accs.append(float(np.sum(w * (pred == y)) / w.sum()))
    assert all(b >= a for a, b in zip(accs, accs[1:]))
    assert accs[-1] > accs[0]


def test_forest_votes_tie_to_lowest_class():
    X = np.array([[0.0], [1.0]])
    f = train_random_forest(X, ["a", "b"], ForestParams(n_trees=2, bootstrap=False, max_depth=0))
    # each depth-0 tree sees one of each class: leaf ties resolve to "a"
    assert predict_forest(f, np.array([0.5])) == "a"
