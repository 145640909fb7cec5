"""Online phase: GP surrogates for one eigen-index and their error metrics.

For eigen-index ``j`` the eigenvalue and each POD coefficient of the
eigenvector are regressed independently on the training parameters, so a
surrogate holds ``1 + N_j`` Gaussian processes sharing one input set.
"""
from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, replace

import numpy as np

from . import gpr
from .errors import DimensionMismatch, PevgpError, ZeroReference
from .gpr import GPModel, KernelKind, OptimizerConfig
from .offline import SnapshotSet
from .pod import DEFAULT_TOL, PODBasis, pod_basis, reduce
from .problems import PROBLEMS, ProblemKind, mass_matrix

__all__ = [
    "SurrogateModel",
    "EigenpairPrediction",
    "MetricsReport",
    "train_surrogate",
    "predict_eigenpair",
    "rrmse",
    "eigvec_error",
    "evaluate_surrogate",
]


@dataclass(frozen=True)
class SurrogateModel:
    eigen_index: int
    kernel: KernelKind
    eigenvalue_model: GPModel
    coefficient_models: tuple
    basis: PODBasis
    train_params: np.ndarray
    problem: ProblemKind | None = None
    n_per_dim: int | None = None

    @property
    def n_modes(self) -> int:
        return len(self.coefficient_models)

    @property
    def models(self) -> tuple:
        """Eigenvalue model followed by the coefficient models."""
        return (self.eigenvalue_model, *self.coefficient_models)


@dataclass(frozen=True)
class EigenpairPrediction:
    """Predicted eigenpair at one parameter.

    ``vector_variance`` propagates the coefficient variances through the
    basis entrywise and ignores covariance between coefficients.
    """

    eigenvalue: float
    variance: float
    vector: np.ndarray
    coefficients: np.ndarray
    coefficient_variances: np.ndarray
    vector_variance: np.ndarray


def train_surrogate(snaps: SnapshotSet, j: int, kind: KernelKind, pod_tol: float = DEFAULT_TOL,
                    opt: OptimizerConfig | None = None, n_modes: int | None = None) -> SurrogateModel:
    """Fit the eigenvalue GP and one GP per POD coefficient of eigen-index ``j``.

    Output ``k`` (0 for the eigenvalue, ``1..N_j`` for the coefficients)
    uses optimizer seed ``opt.seed + k``.
    """
    opt = opt or OptimizerConfig()
    basis = pod_basis(snaps.vectors(j), tol=pod_tol, n_modes=n_modes, eigen_index=j)
    coeffs = reduce(basis, snaps.vectors(j))  # (N_j, n_s)
    X = snaps.parameters
    outputs = [snaps.values(j), *coeffs]
    models = []
    for k, y in enumerate(outputs):
        try:
            models.append(gpr.fit(X, y, kind, replace(opt, seed=opt.seed + k)))
        except PevgpError as exc:
            what = "eigenvalue" if k == 0 else f"coefficient {k}"
            raise type(exc)(f"fitting {what} of eigen-index {j}: {exc}") from exc
    return SurrogateModel(j, kind, models[0], tuple(models[1:]), basis, X.copy(), snaps.kind, snaps.n_per_dim)


def predict_eigenpair(model: SurrogateModel, mu) -> EigenpairPrediction:
    """Eigenvalue posterior and reconstructed eigenvector at ``mu``."""
    d = model.train_params.shape[1]
    mu = np.asarray(mu, dtype=float).reshape(1, d)
    if not np.all(np.isfinite(mu)):
        raise ValueError("parameter must be finite")
    if model.problem is not None and not PROBLEMS[model.problem].contains(mu[0]):
        warnings.warn(f"extrapolating outside the parameter space at mu={mu[0].tolist()}", stacklevel=2)
    lam, lam_var = gpr.predict(model.eigenvalue_model, mu)
    c = np.empty(model.n_modes)
    c_var = np.empty(model.n_modes)
    for k, m in enumerate(model.coefficient_models):
        mean, var = gpr.predict(m, mu)
        c[k], c_var[k] = mean[0], var[0]
    V = model.basis.basis
    return EigenpairPrediction(
        eigenvalue=float(lam[0]),
        variance=float(lam_var[0]),
        vector=V @ c,
        coefficients=c,
        coefficient_variances=c_var,
        vector_variance=(V * V) @ c_var,
    )


def rrmse(reference, predicted) -> float:
    """``sqrt(mean((lam - lam_hat)^2) / sum(lam^2))``.

    The denominator is the plain sum, not the mean, of the squared
    reference values.
    """
    ref = np.asarray(reference, dtype=float).ravel()
    pred = np.asarray(predicted, dtype=float).ravel()
    if ref.shape != pred.shape or ref.size == 0:
        raise DimensionMismatch(f"lengths differ or are zero: {ref.size} vs {pred.size}")
    denom = np.sum(ref * ref)
    if denom == 0.0:
        raise ZeroReference("reference eigenvalues are all zero")
    return float(np.sqrt(np.mean((ref - pred) ** 2) / denom))


def eigvec_error(u_ref, u_hat, mass):
    """Sign-fixed difference ``u_ref - s u_hat`` and its mass and max norms.

    ``s`` is the sign that makes the mass norm of the difference smallest.
    """
    u_ref = np.asarray(u_ref, dtype=float)
    u_hat = np.asarray(u_hat, dtype=float)
    if u_ref.shape != u_hat.shape or mass.shape != (u_ref.size, u_ref.size):
        raise DimensionMismatch("vector and mass matrix sizes disagree")
    s = -1.0 if u_hat @ (mass @ u_ref) < 0 else 1.0
    e = u_ref - s * u_hat
    return e, float(np.sqrt(max(e @ (mass @ e), 0.0))), float(np.max(np.abs(e)))


@dataclass(frozen=True)
class MetricsReport:
    """Per-test-point comparison of a surrogate against reference solves."""

    kernel: KernelKind
    eigen_index: int
    parameters: np.ndarray
    reference: np.ndarray
    predicted: np.ndarray
    variance: np.ndarray
    rel_err: np.ndarray
    ci_lo: np.ndarray
    ci_hi: np.ndarray
    rrmse: float
    eigvec_l2: np.ndarray
    eigvec_max: np.ndarray
    coefficients: np.ndarray
    coefficient_variances: np.ndarray
    seconds: float = 0.0


def evaluate_surrogate(model: SurrogateModel, test: SnapshotSet, level: float = 0.95,
                       error_fields: bool = False):
    """Compare predictions with the reference eigenpairs in ``test``.

    With ``error_fields`` also returns the list of sign-fixed eigenvector
    error vectors, one per test point.
    """
    j = model.eigen_index
    if test.kind != model.problem or test.n_per_dim != model.n_per_dim:
        raise DimensionMismatch(
            f"test set ({test.kind.value}, n_per_dim={test.n_per_dim}) does not match the model "
            f"({model.problem.value if model.problem else None}, n_per_dim={model.n_per_dim})"
        )
    t0 = time.perf_counter()
    preds = [predict_eigenpair(model, mu) for mu in test.parameters]
    seconds = time.perf_counter() - t0
    ref = test.values(j)
    lam = np.array([p.eigenvalue for p in preds])
    var = np.array([p.variance for p in preds])
    lo, hi = gpr.confidence_interval(lam, var, level)
    l2, mx, fields = [], [], []
    for i, (mu, p) in enumerate(zip(test.parameters, preds)):
        B = mass_matrix(test.kind, mu, test.n_per_dim)
        e, a, b = eigvec_error(test.vectors(j)[:, i], p.vector, B)
        l2.append(a)
        mx.append(b)
        fields.append(e)
    report = MetricsReport(
        kernel=model.kernel,
        eigen_index=j,
        parameters=test.parameters.copy(),
        reference=ref.copy(),
        predicted=lam,
        variance=var,
        rel_err=np.abs(lam - ref) / np.abs(ref),
        ci_lo=lo,
        ci_hi=hi,
        rrmse=rrmse(ref, lam),
        eigvec_l2=np.array(l2),
        eigvec_max=np.array(mx),
        coefficients=np.array([p.coefficients for p in preds]),
        coefficient_variances=np.array([p.coefficient_variances for p in preds]),
        seconds=seconds,
    )
    return (report, fields) if error_fields else report
