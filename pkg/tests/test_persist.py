import numpy as np
import pytest

from drowsiness.attention import CLASSES
from drowsiness.classify import ForestParams, KernelSpec, SvmParams, train_multiclass, train_random_forest
from drowsiness.classify import persist
from drowsiness.errors import FormatError
from drowsiness.features import AttributeSet, FeatureSpec, fit_scaler


@pytest.fixture
def data():
    rng = np.random.default_rng(0)
    X = np.vstack([rng.normal(loc=3 * k, size=(20, 5)) for k in range(3)])
    y = [c for c in CLASSES for _ in range(20)]
    return X, y, rng.normal(loc=3, scale=3, size=(50, 5))


@pytest.mark.parametrize("kernel", [KernelSpec("linear"), KernelSpec("polynomial", gamma=0.5, coef0=1.0),
                                    KernelSpec("rbf"), KernelSpec("sigmoid", gamma=0.01)])
def test_svm_round_trip(tmp_path, data, kernel):
    X, y, probe = data
    scaler = fit_scaler(X)
    clf = persist.TrainedClassifier(train_multiclass(scaler.apply(X), y, kernel, SvmParams()),
                                    FeatureSpec(AttributeSet.AU), scaler)
    persist.save(clf, tmp_path / "m.json")
    back = persist.load(tmp_path / "m.json")
    assert back.predict(probe) == clf.predict(probe)
    np.testing.assert_array_equal(back.model.decisions(scaler.apply(probe)),
                                  clf.model.decisions(scaler.apply(probe)))
    assert persist.dumps(back) == persist.dumps(clf)


def test_forest_round_trip(tmp_path, data):
    X, y, probe = data
    clf = persist.TrainedClassifier(train_random_forest(X, y, ForestParams(n_trees=15, seed=2)),
                                    FeatureSpec(AttributeSet.HOG), None)
    persist.save(clf, tmp_path / "f.json")
    back = persist.load(tmp_path / "f.json")
    assert back.predict(probe) == clf.predict(probe)
    assert back.classes == clf.classes
    assert persist.dumps(back) == persist.dumps(clf)


def test_rejects_foreign_json():
    with pytest.raises(FormatError):
        persist.loads('{"format": "something-else"}')
    with pytest.raises(FormatError):
        persist.loads("not json")
