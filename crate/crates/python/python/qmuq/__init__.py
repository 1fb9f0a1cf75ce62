"""Shot-noise uncertainty for variational-circuit PDE surrogates."""

from ._qmuq import (
    StateVector,
    VqcModel,
    born_variance,
    calibration,
    exact_solution,
    gaussian_interval,
    info_bits,
    list_experiments,
    normal_quantile,
    quantum_interval,
    run_experiment,
)

__all__ = [
    "StateVector",
    "VqcModel",
    "born_variance",
    "calibration",
    "exact_solution",
    "gaussian_interval",
    "info_bits",
    "list_experiments",
    "normal_quantile",
    "quantum_interval",
    "run_experiment",
]
