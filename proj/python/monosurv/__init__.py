"""Survival regression with partially monotonic neural networks.

The heavy lifting lives in the compiled extension; this package re-exports
its surface: toy-data simulation, CSV I/O, training, prediction, evaluation
and the Kaplan-Meier estimator.
"""

from ._core import (
    KaplanMeierCurve,
    Model,
    evaluate,
    load_csv,
    load_model,
    save_csv,
    simulate_toy,
    train,
    __version__,
)

__all__ = [
    "KaplanMeierCurve",
    "Model",
    "evaluate",
    "load_csv",
    "load_model",
    "save_csv",
    "simulate_toy",
    "train",
    "__version__",
]
