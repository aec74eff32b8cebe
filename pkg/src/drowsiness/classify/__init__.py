from ._backend import BACKEND
from .forest import ForestParams, RandomForest, predict_forest, train_random_forest
from .persist import TrainedClassifier
from .kernels import KernelKind, KernelSpec, gram, kernel_eval
from .svm import (BinarySvm, MulticlassSvm, SvmParams, decision_function, dual_objective, predict,
                  train_binary_svm, train_multiclass)

__all__ = [
    "BACKEND", "BinarySvm", "ForestParams", "KernelKind", "KernelSpec", "MulticlassSvm", "RandomForest",
    "SvmParams", "TrainedClassifier", "decision_function", "dual_objective", "gram", "kernel_eval",
    "predict", "predict_forest", "train_binary_svm", "train_multiclass", "train_random_forest",
]
