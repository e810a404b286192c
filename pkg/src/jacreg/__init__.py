"""Efficient Jacobian nuclear-norm regularization toolkit."""

from . import experiments, linalg, models, regularizers, rng, tensor, training

__version__ = "0.1.0"

__all__ = ["experiments", "linalg", "models", "regularizers", "rng",
           "tensor", "training", "__version__"]
