"""Sparse-penalized neural network estimation for dependent time series.

Thin Python surface over the C++ core: simulators for the four synthetic
processes, penalized minibatch training, error evaluation against the
known generating process, and the tuning-schedule / rate calculators.
"""

from ._core import (
    Network,
    Trajectory,
    __version__,
    bayes_classifier,
    classification_rate,
    clipped_norm,
    covering_bound,
    dependence_diagnostic,
    evaluate_excess_risk,
    evaluate_l2,
    evaluate_mse,
    l0_norm,
    mean_function,
    penalty_subgradient,
    penalty_value,
    regression_rate,
    replicate,
    schedule,
    simulate,
    simulate_exog_ar1,
    train,
)

__all__ = [
    "Network",
    "Trajectory",
    "__version__",
    "bayes_classifier",
    "classification_rate",
    "clipped_norm",
    "covering_bound",
    "dependence_diagnostic",
    "evaluate_excess_risk",
    "evaluate_l2",
    "evaluate_mse",
    "l0_norm",
    "mean_function",
    "penalty_subgradient",
    "penalty_value",
    "regression_rate",
    "replicate",
    "schedule",
    "simulate",
    "simulate_exog_ar1",
    "train",
]
