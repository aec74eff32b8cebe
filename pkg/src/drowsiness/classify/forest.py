"""Random forest of Gini CART trees grown on bootstrap resamples."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Hashable, Sequence

import numpy as np

from ..errors import DimMismatch, SingleClassData
from ._backend import core


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = 100
    max_depth: int | None = None
    max_features: int | str = "sqrt"
    bootstrap: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if self.max_depth is not None and self.max_depth < 0:
            raise ValueError("max_depth must be >= 0")

    def features_per_split(self, dim: int) -> int:
        if self.max_features == "sqrt":
            return max(1, int(math.sqrt(dim)))
        if self.max_features in (None, "all"):
            return dim
        return max(1, min(dim, int(self.max_features)))


@dataclass(eq=False)
class Tree:
    """Flat node arrays; ``feature == -1`` marks a leaf.

    ``value[node]`` is the class histogram of the (bootstrap-weighted)
    training rows that reached the node.
    """
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    @property
    def n_nodes(self) -> int:
        return self.feature.size

    def leaves(self) -> np.ndarray:
        return np.flatnonzero(self.feature < 0)


@dataclass(eq=False)
class RandomForest:
    classes: list
    trees: list[Tree]
    params: ForestParams
    dim: int
    _flat: tuple | None = field(default=None, repr=False)

    def _flatten(self):
        if self._flat is None:
            offs = np.cumsum([0] + [t.n_nodes for t in self.trees])
            feature = np.concatenate([t.feature for t in self.trees]).astype(np.intp)
            threshold = np.concatenate([t.threshold for t in self.trees]).astype(np.float64)
            shift = lambda a, o: np.where(a >= 0, a + o, -1)
            left = np.concatenate([shift(t.left, o) for t, o in zip(self.trees, offs)]).astype(np.intp)
            right = np.concatenate([shift(t.right, o) for t, o in zip(self.trees, offs)]).astype(np.intp)
            # per-node vote: majority class of the leaf histogram, ties to the lower index
            leaf_class = np.concatenate([np.argmax(t.value, axis=1) for t in self.trees]).astype(np.intp)
            self._flat = (feature, threshold, left, right, offs[:-1].astype(np.intp), leaf_class)
        return self._flat

    def predict_index(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.dim:
            raise DimMismatch(f"forest dim {self.dim}, input dim {X.shape[1]}")
        feature, threshold, left, right, roots, leaf_class = self._flatten()
        leaves = core.forest_apply(feature, threshold, left, right, roots, X)
        votes = leaf_class[leaves]
        counts = np.zeros((X.shape[0], len(self.classes)), dtype=np.int64)
        for k in range(len(self.classes)):
            counts[:, k] = np.count_nonzero(votes == k, axis=1)
        return np.argmax(counts, axis=1)

    def predict(self, X) -> list:
        return [self.classes[k] for k in self.predict_index(X)]


def _node_rng(seed: int, tree: int, depth: int, position: int) -> np.random.Generator:
    # Keyed by node position so a shallower tree is an exact prefix of a deeper one.
    return np.random.default_rng([seed, tree, depth, position])


def build_tree(X, y, weights, n_classes: int, params: ForestParams, tree_index: int = 0) -> Tree:
    n, dim = X.shape
    m = params.features_per_split(dim)
    feature, threshold, left, right, value = [], [], [], [], []

    def new_node(rows):
        hist = np.bincount(y[rows], weights=weights[rows], minlength=n_classes)
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(hist)
        return len(feature) - 1

    root_rows = np.flatnonzero(weights > 0)
    stack = [(new_node(root_rows), root_rows, 0, 0)]
    while stack:
        node, rows, depth, pos = stack.pop()
        hist = value[node]
        if np.count_nonzero(hist) < 2 or (params.max_depth is not None and depth >= params.max_depth):
            continue
        rng = _node_rng(params.seed, tree_index, depth, pos)
        cand = np.sort(rng.choice(dim, size=m, replace=False)) if m < dim else np.arange(dim)
        f, thr, _ = core.best_split(X, rows, weights, y, cand, n_classes)
        if f < 0:
            continue
        go_left = X[rows, f] <= thr
        feature[node], threshold[node] = f, thr
        l_node = new_node(rows[go_left])
        r_node = new_node(rows[~go_left])
        left[node], right[node] = l_node, r_node
        stack.append((r_node, rows[~go_left], depth + 1, 2 * pos + 1))
        stack.append((l_node, rows[go_left], depth + 1, 2 * pos))
    return Tree(np.array(feature, dtype=np.intp), np.array(threshold, dtype=np.float64),
                np.array(left, dtype=np.intp), np.array(right, dtype=np.intp),
                np.array(value, dtype=np.float64).reshape(-1, n_classes))


def bootstrap_weights(n: int, seed: int, tree_index: int) -> np.ndarray:
    draws = np.random.default_rng([seed, tree_index]).integers(n, size=n)
    return np.bincount(draws, minlength=n).astype(np.float64)


def train_random_forest(X, labels: Sequence[Hashable], params: ForestParams | None = None,
                        classes: Sequence | None = None) -> RandomForest:
    params = params or ForestParams()
    X = np.ascontiguousarray(np.atleast_2d(np.asarray(X, dtype=np.float64)))
    labels = list(labels)
    present = set(labels)
    classes = [c for c in classes if c in present] if classes is not None else sorted(present)
    if len(classes) < 2:
        raise SingleClassData("need at least two classes to train a classifier")
    y = np.array([classes.index(l) for l in labels], dtype=np.intp)
    n = X.shape[0]
    trees = []
    for t in range(params.n_trees):
        w = bootstrap_weights(n, params.seed, t) if params.bootstrap else np.ones(n)
        trees.append(build_tree(X, y, w, len(classes), params, t))
    return RandomForest(list(classes), trees, params, X.shape[1])


def predict_forest(forest: RandomForest, x):
    out = forest.predict(x)
    return out[0] if np.ndim(x) == 1 else out
