"""Gaussian-process surrogates for parametric PDE eigenvalue problems.

The offline phase solves finite-element eigenproblems on a parameter grid
(:mod:`pevgp.problems`, :mod:`pevgp.offline`) and compresses eigenvectors
with POD (:mod:`pevgp.pod`). The online phase regresses eigenvalues and
POD coefficients on the parameter with Gaussian processes
(:mod:`pevgp.gpr`, :mod:`pevgp.surrogate`). :mod:`pevgp.baselines` holds
spline interpolants for comparison and :mod:`pevgp.cli` the file formats
and command-line driver.
"""
from .errors import (
    ArchiveError,
    ConfigError,
    ConvergenceFailure,
    DegenerateSnapshot,
    DimensionMismatch,
    DuplicateKnots,
    NotPositiveDefinite,
    NumericalError,
    OptimizationFailure,
    OutOfDomain,
    ParameterOutOfRange,
    PevgpError,
    ZeroReference,
)
from .gpr import GPModel, Hyperparameters, KernelKind, OptimizerConfig, fit, predict
from .offline import SnapshotSet, TrainTestSplit, default_split, generate_snapshots
from .pod import PODBasis, pod_basis
from .problems import PROBLEMS, ProblemKind, assemble, exact_crossing_eigs, solve_eigenpairs, solve_nonlinear_1d
from .surrogate import (
    EigenpairPrediction,
    MetricsReport,
    SurrogateModel,
    evaluate_surrogate,
    predict_eigenpair,
    rrmse,
    train_surrogate,
)

__version__ = "0.1.0"

__all__ = [
    "ArchiveError",
    "ConfigError",
    "ConvergenceFailure",
    "DegenerateSnapshot",
    "DimensionMismatch",
    "DuplicateKnots",
    "NotPositiveDefinite",
    "NumericalError",
    "OptimizationFailure",
    "OutOfDomain",
    "ParameterOutOfRange",
    "PevgpError",
    "ZeroReference",
    "GPModel",
    "Hyperparameters",
    "KernelKind",
    "OptimizerConfig",
    "fit",
    "predict",
    "SnapshotSet",
    "TrainTestSplit",
    "default_split",
    "generate_snapshots",
    "PODBasis",
    "pod_basis",
    "PROBLEMS",
    "ProblemKind",
    "assemble",
    "exact_crossing_eigs",
    "solve_eigenpairs",
    "solve_nonlinear_1d",
    "EigenpairPrediction",
    "MetricsReport",
    "SurrogateModel",
    "evaluate_surrogate",
    "predict_eigenpair",
    "rrmse",
    "train_surrogate",
]
