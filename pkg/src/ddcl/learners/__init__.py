"""Classifiers that consume a curriculum ordering."""

from .forest import ForestModel, ForestSpec, predict_forest, train_forest
from .mlp import (MlpModel, MlpSpec, TrainingDivergedError, TrainLog, mlp_gradients,
                  predict_mlp, train_mlp, tune_hidden_layers)
from .svm import SvmModel, SvmSpec, predict_svm, rbf_kernel, train_svm

__all__ = [
    "ForestModel", "ForestSpec", "predict_forest", "train_forest",
    "MlpModel", "MlpSpec", "TrainLog", "TrainingDivergedError", "mlp_gradients",
    "predict_mlp", "train_mlp", "tune_hidden_layers",
    "SvmModel", "SvmSpec", "predict_svm", "rbf_kernel", "train_svm",
]
