"""Experiment runner and command-line front end."""

from .config import ExperimentConfig
from .runner import evaluate_predictions, generate, reconstruct, report

__all__ = ["ExperimentConfig", "evaluate_predictions", "generate", "reconstruct", "report"]
