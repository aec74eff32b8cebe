import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from drowsiness.classify import (KernelSpec, SvmParams, decision_function, gram, predict, train_binary_svm,
                                 train_multiclass)
from drowsiness.classify.svm import dual_objective, solve_dual, vote
from drowsiness.errors import SingleClassData
from oracles import dual_value, qp_dual, random_instance

LIN = KernelSpec("linear", gamma=1.0)


@pytest.fixture
def two_point():
    return train_binary_svm([[-1.0, 0.0], [1.0, 0.0]], [-1, 1], LIN, SvmParams(c=1.0))


def test_two_point_analytic(two_point):
    # alpha = 1/2 for both points gives w = (1, 0), b = 0
    assert two_point.support_vectors.shape == (2, 2)
    np.testing.assert_allclose(two_point.dual_coefs, [-0.5, 0.5])
    assert two_point.bias == 0.0
    assert decision_function(two_point, [2.0, 0.0]) == pytest.approx(2.0)
    assert decision_function(two_point, [0.0, 0.0]) == pytest.approx(0.0)
    assert decision_function(two_point, [-3.0, 0.0]) == pytest.approx(-3.0)


def test_single_class():
    with pytest.raises(SingleClassData):
        train_binary_svm([[0.0], [1.0]], [1, 1], LIN)


def test_not_converged_is_flagged():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(300, 2))
    y = rng.choice([-1.0, 1.0], size=300)
    m = train_binary_svm(X, y, KernelSpec("rbf", gamma=1.0), SvmParams(max_passes=1, tol=1e-9))
    assert not m.converged and m.n_iter == 300


@pytest.mark.parametrize("seed", range(25))
def test_matches_qp_oracle(seed):
    rng = np.random.default_rng(seed)
    X, y = random_instance(rng)
    kind = ["linear", "polynomial", "rbf"][seed % 3]
    spec = KernelSpec(kind, gamma=0.5, coef0=1.0 if kind == "polynomial" else 0.0)
    C = [0.5, 1.0, 10.0][seed % 3]
    K = gram(spec, X)
    alpha, bias, _, converged = solve_dual(K, y, SvmParams(c=C, tol=1e-6))
    a_ref, b_ref = qp_dual(K, y, C)
    assert converged
    assert abs(dual_objective(alpha, y, K) - dual_value(a_ref, y, K)) < 1e-3
    T = np.vstack([X, 1.5 * rng.normal(size=(100, 2))])
    ours = np.sign(gram(spec, T, X) @ (alpha * y) + bias)
    ref = np.sign(gram(spec, T, X) @ (a_ref * y) + b_ref)
    np.testing.assert_array_equal(ours, ref)


@pytest.mark.parametrize("seed", range(10))
def test_default_tolerance_objective_gap(seed):
    rng = np.random.default_rng(100 + seed)
    X, y = random_instance(rng)
    K = gram(LIN, X)
    alpha, _, _, _ = solve_dual(K, y, SvmParams())
    a_ref, _ = qp_dual(K, y, 1.0)
    assert abs(dual_objective(alpha, y, K) - dual_value(a_ref, y, K)) < 1e-3


@given(st.integers(0, 10_000), st.sampled_from([0.1, 1.0, 5.0]))
@settings(max_examples=40, deadline=None)
def test_dual_feasibility(seed, C):
    X, y = random_instance(np.random.default_rng(seed))
    params = SvmParams(c=C)
    alpha, _, _, _ = solve_dual(gram(KernelSpec("rbf", gamma=0.7), X), y, params)
    assert (alpha >= 0).all() and (alpha <= C).all()
    assert abs(alpha @ y) <= params.tol
    m = train_binary_svm(X, y, KernelSpec("rbf", gamma=0.7), params)
    assert (np.abs(m.dual_coefs) <= C).all() and abs(m.dual_coefs.sum()) <= params.tol


def test_sigmoid_trains():
    X, y = random_instance(np.random.default_rng(4))
    m = train_binary_svm(X, y, KernelSpec("sigmoid", gamma=2.0, coef0=-1.0))
    assert np.isfinite(m.bias) and np.isfinite(m.dual_coefs).all()


def clusters(rng, n=20):
    centres = np.array([[0.0, 0.0], [10.0, 0.0], [0.0, 10.0]])
    X, y = [], []
    for k, c in enumerate(centres):
        r = rng.uniform(0, 1, n)
        t = rng.uniform(0, 2 * np.pi, n)
        X.append(c + np.c_[r * np.cos(t), r * np.sin(t)])
        y += ["abc"[k]] * n
    return np.vstack(X), y, centres


def test_multiclass_three_clusters():
    X, y, centres = clusters(np.random.default_rng(0))
    model = train_multiclass(X, y, LIN)
    assert len(model.machines) == 3
    assert model.predict(X) == y
    assert [predict(model, c) for c in centres] == ["a", "b", "c"]


def test_multiclass_two_classes_matches_binary():
    X, y, _ = clusters(np.random.default_rng(1))
    X, y = X[:40], y[:40]
    model = train_multiclass(X, y, LIN)
    binary = train_binary_svm(X, [1 if v == "a" else -1 for v in y], LIN)
    assert len(model.machines) == 1
    np.testing.assert_array_equal(model.machines[0].dual_coefs, binary.dual_coefs)
    assert model.machines[0].bias == binary.bias
    probe = np.array([[4.0, 0.0], [6.0, 0.0]])
    assert model.predict(probe) == ["a" if d > 0 else "b" for d in binary.decision(probe)]


def test_multiclass_errors_name_pair():
    with pytest.raises(SingleClassData):
        train_multiclass([[0.0], [1.0]], ["a", "a"], LIN)


def test_vote_majority():
    # pairs (0,1), (0,2), (1,2): 0 beats 1, 2 beats 0, 2 beats 1
    assert vote(np.array([[1.0, -1.0, -1.0]]), 3).tolist() == [2]


def test_vote_three_way_tie():
    # 0 beats 1 (0.5), 2 beats 0 (2.0), 1 beats 2 (0.7): one vote each, class 2 most confident
    d = np.array([[0.5, -2.0, 0.7]])
    assert vote(d, 3).tolist() == [2]
    assert vote(d, 3).tolist() == vote(d.copy(), 3).tolist()
    # equal confidence falls back to class order
    assert vote(np.array([[1.0, -1.0, 1.0]]), 3).tolist() == [0]


def test_rbf_scaling_invariance():
    rng = np.random.default_rng(5)
    X, y, _ = clusters(rng)
    X = X + rng.normal(scale=2.0, size=X.shape)
    probe = rng.uniform(-2, 12, size=(50, 2))
    s = 7.0
    a = train_multiclass(X, y, KernelSpec("rbf", gamma=0.2), SvmParams(tol=1e-6))
    b = train_multiclass(X * s, y, KernelSpec("rbf", gamma=0.2 / s ** 2), SvmParams(tol=1e-6))
    assert a.predict(probe) == b.predict(probe * s)


def test_deterministic():
    X, y, _ = clusters(np.random.default_rng(9))
    X = X + np.random.default_rng(10).normal(scale=3.0, size=X.shape)
    a = train_multiclass(X, y, KernelSpec("polynomial"), SvmParams(seed=3))
    b = train_multiclass(X, y, KernelSpec("polynomial"), SvmParams(seed=3))
    for ma, mb in zip(a.machines, b.machines):
        np.testing.assert_array_equal(ma.dual_coefs, mb.dual_coefs)
        assert ma.bias == mb.bias
