"""Reconstruction baselines."""

from .interpolation import global_interpolate, knn_interpolate
from .models import (KINDS, GaussianProcess, GlobalInterpolation, KNNInterpolation,
                     PointMLP, PolynomialRegression, Reconstructor, TrainSetView, VectorMLP,
                     load_weights, make_reconstructor, reconstruct_field, save_weights,
                     train_mlp_point, train_mlp_vector)
from .regression import fit_predict_gpr, fit_predict_poly

__all__ = [
    "KINDS", "GaussianProcess", "GlobalInterpolation", "KNNInterpolation", "PointMLP",
    "PolynomialRegression", "Reconstructor", "TrainSetView", "VectorMLP", "fit_predict_gpr",
    "fit_predict_poly", "global_interpolate", "knn_interpolate", "load_weights",
    "make_reconstructor", "reconstruct_field", "save_weights", "train_mlp_point",
    "train_mlp_vector",
]
