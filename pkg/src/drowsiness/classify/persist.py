"""JSON model documents.

Floats are written with ``repr`` precision, so ``load(save(m))`` predicts
identically to ``m``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any

import numpy as np

from ..attention import Label
from ..errors import FormatError
from ..features import FeatureSpec, Scaler
from .forest import ForestParams, RandomForest, Tree
from .kernels import KernelSpec
from .svm import BinarySvm, MulticlassSvm

FORMAT = "drowsiness-model/1"


def _enc_class(c):
    return c.value if isinstance(c, Label) else c


def _dec_class(c, kind):
    return Label(c) if kind == "label" else c


@dataclass(eq=False)
class TrainedClassifier:
    """A fitted model plus the feature transform it expects."""
    model: MulticlassSvm | RandomForest
    feature_spec: FeatureSpec | None = None
    scaler: Scaler | None = None

    @property
    def classes(self) -> list:
        return self.model.classes

    def transform(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        return self.scaler.apply(X) if self.scaler is not None else X

    def predict(self, X) -> list:
        return self.model.predict(self.transform(X))


def model_to_json(model) -> dict[str, Any]:
    kind = "label" if all(isinstance(c, Label) for c in model.classes) else "raw"
    doc: dict[str, Any] = {"classes": [_enc_class(c) for c in model.classes], "class_kind": kind}
    if isinstance(model, MulticlassSvm):
        doc["type"] = "svm"
        doc["machines"] = [{
            "class_pair": [_enc_class(c) for c in m.class_pair],
            "kernel": m.kernel.to_json(),
            "bias": m.bias,
            "dual_coefs": m.dual_coefs.tolist(),
            "support_vectors": m.support_vectors.tolist(),
            "converged": m.converged,
            "n_iter": m.n_iter,
        } for m in model.machines]
    elif isinstance(model, RandomForest):
        p = model.params
        doc["type"] = "forest"
        doc["dim"] = model.dim
        doc["params"] = {"n_trees": p.n_trees, "max_depth": p.max_depth, "max_features": p.max_features,
                         "bootstrap": p.bootstrap, "seed": p.seed}
        doc["trees"] = [{
            "feature": t.feature.tolist(), "threshold": t.threshold.tolist(),
            "left": t.left.tolist(), "right": t.right.tolist(), "value": t.value.tolist(),
        } for t in model.trees]
    else:
        raise TypeError(f"cannot serialize {type(model).__name__}")
    return doc


def model_from_json(doc: dict[str, Any]):
    kind = doc.get("class_kind", "raw")
    classes = [_dec_class(c, kind) for c in doc["classes"]]
    if doc["type"] == "svm":
        machines = []
        for m in doc["machines"]:
            sv = np.array(m["support_vectors"], dtype=np.float64)
            dim = sv.shape[1] if sv.ndim == 2 else 0
            machines.append(BinarySvm(
                sv.reshape(-1, dim) if dim else sv.reshape(0, 0),
                np.array(m["dual_coefs"], dtype=np.float64), float(m["bias"]),
                KernelSpec.from_json(m["kernel"]), tuple(_dec_class(c, kind) for c in m["class_pair"]),
                bool(m["converged"]), int(m["n_iter"])))
        return MulticlassSvm(classes, machines)
    if doc["type"] == "forest":
        trees = [Tree(np.array(t["feature"], dtype=np.intp), np.array(t["threshold"], dtype=np.float64),
                      np.array(t["left"], dtype=np.intp), np.array(t["right"], dtype=np.intp),
                      np.array(t["value"], dtype=np.float64).reshape(len(t["feature"]), len(classes)))
                 for t in doc["trees"]]
        return RandomForest(classes, trees, ForestParams(**doc["params"]), int(doc["dim"]))
    raise FormatError(f"unknown model type {doc.get('type')!r}")


def dumps(clf: TrainedClassifier) -> str:
    doc = {
        "format": FORMAT,
        "feature_spec": clf.feature_spec.tag if clf.feature_spec else None,
        "scaler": clf.scaler.to_json() if clf.scaler else None,
        "model": model_to_json(clf.model),
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"


def loads(text: str) -> TrainedClassifier:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"model file is not JSON: {exc}") from None
    if doc.get("format") != FORMAT:
        raise FormatError(f"unsupported model format {doc.get('format')!r}")
    spec = FeatureSpec.from_tag(doc["feature_spec"]) if doc.get("feature_spec") else None
    scaler = Scaler.from_json(doc["scaler"]) if doc.get("scaler") else None
    return TrainedClassifier(model_from_json(doc["model"]), spec, scaler)


def save(clf: TrainedClassifier, path) -> None:
    with open(path, "w") as fh:
        fh.write(dumps(clf))


def load(path) -> TrainedClassifier:
    with open(path) as fh:
        return loads(fh.read())
