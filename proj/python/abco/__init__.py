"""Adaptive Bayesian changepoint detection with outliers."""

from ._core import (
    AbcoError,
    BenchmarkRow,
    ChangepointReport,
    ModelConfig,
    PriorHyper,
    RegressionReport,
    adjusted_rand,
    cp_metrics,
    fit,
    fit_draws,
    fit_interrupted,
    fit_regression,
    outlier_metrics,
    pelt,
    rand_index,
    run_benchmark,
    scenarios,
    simulate,
)


def config(**fields):
    """ModelConfig with the given fields set, e.g. config(d=1, iters=2000)."""
    cfg = ModelConfig()
    for key, value in fields.items():
        if not hasattr(cfg, key):
            raise AttributeError(f"ModelConfig has no field '{key}'")
        setattr(cfg, key, value)
    return cfg


__all__ = [
    "AbcoError",
    "BenchmarkRow",
    "ChangepointReport",
    "ModelConfig",
    "PriorHyper",
    "RegressionReport",
    "adjusted_rand",
    "config",
    "cp_metrics",
    "fit",
    "fit_draws",
    "fit_interrupted",
    "fit_regression",
    "outlier_metrics",
    "pelt",
    "rand_index",
    "run_benchmark",
    "scenarios",
    "simulate",
]
