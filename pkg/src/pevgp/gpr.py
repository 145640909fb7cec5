"""Gaussian process regression with a linear mean.

A GP prior ``f ~ GP(m, k)`` with linear mean ``m(mu) = a0 + a . mu`` and one
of four stationary, isotropic kernels is conditioned on training data
``(M, y)``. The posterior at ``mu*`` is Gaussian with

    mean  m(mu*) + k(mu*, M) K^{-1} (y - m(M))
    var   k(mu*, mu*) - k(mu*, M) K^{-1} k(M, mu*)

where ``K = k(M, M) + sigma_n^2 I``. Hyperparameters are chosen by
maximising the log marginal likelihood with a multi-start Nelder-Mead
search over ``(log sigma_f, log ell, log sigma_n)``; the mean coefficients
are profiled out by generalised least squares at every evaluation.
"""
from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy.optimize import minimize
from scipy.stats import norm

from .errors import DimensionMismatch, NotPositiveDefinite, OptimizationFailure
from .numkernel import SpdFactor, cholesky_spd, solve_spd

__all__ = [
    "KernelKind",
    "Hyperparameters",
    "GPModel",
    "OptimizerConfig",
    "kernel_eval",
    "kernel_matrix",
    "gram",
    "log_marginal_likelihood",
    "posterior",
    "fit",
    "predict",
    "confidence_interval",
]

log = logging.getLogger(__name__)

_LOG_2PI = math.log(2.0 * math.pi)
_SQRT3 = math.sqrt(3.0)
_SQRT5 = math.sqrt(5.0)


class KernelKind(enum.Enum):
    SE = "se"
    EXP = "exp"
    MATERN32 = "matern32"
    MATERN52 = "matern52"

    @classmethod
    def parse(cls, name: str) -> "KernelKind":
        key = name.strip().lower().replace("_", "").replace("-", "").replace(" ", "")
        aliases = {
            "se": cls.SE, "squaredexponential": cls.SE, "rbf": cls.SE,
            "exp": cls.EXP, "exponential": cls.EXP, "absoluteexponential": cls.EXP,
            "matern32": cls.MATERN32, "matern3/2": cls.MATERN32,
            "matern52": cls.MATERN52, "matern5/2": cls.MATERN52,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(
                f"unknown kernel {name!r}; expected one of {{se, exp, matern32, matern52}}"
            ) from None

    @property
    def label(self) -> str:
        return {"se": "SE", "exp": "Exp", "matern32": "Matern 3/2", "matern52": "Matern 5/2"}[self.value]


@dataclass(frozen=True)
class Hyperparameters:
    """``theta = (a_0, ..., a_d, sigma_f, ell, sigma_n)``."""

    mean_coeffs: tuple
    signal_std: float
    length_scale: float
    noise_std: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "mean_coeffs", tuple(float(a) for a in self.mean_coeffs))
        if not (math.isfinite(self.signal_std) and self.signal_std > 0):
            raise ValueError(f"signal_std must be positive and finite, got {self.signal_std}")
        if not (math.isfinite(self.length_scale) and self.length_scale > 0):
            raise ValueError(f"length_scale must be positive and finite, got {self.length_scale}")
        if not (math.isfinite(self.noise_std) and self.noise_std >= 0):
            raise ValueError(f"noise_std must be nonnegative and finite, got {self.noise_std}")

    @property
    def dim(self) -> int:
        return len(self.mean_coeffs) - 1

    def mean(self, X) -> np.ndarray:
        X = _as_inputs(X, self.dim)
        a = np.asarray(self.mean_coeffs)
        return a[0] + X @ a[1:]

    def as_vector(self) -> np.ndarray:
        return np.array([*self.mean_coeffs, self.signal_std, self.length_scale, self.noise_std])

    @classmethod
    def from_vector(cls, v) -> "Hyperparameters":
        v = np.asarray(v, dtype=float)
        return cls(tuple(v[:-3]), float(v[-3]), float(v[-2]), float(v[-1]))


def _as_inputs(X, d: int) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim <= 1:
        X = X.reshape(-1, d)
    if X.ndim != 2 or X.shape[1] != d:
        raise DimensionMismatch(f"inputs must have {d} columns, got shape {X.shape}")
    return X


def _kernel_of_distance(kind: KernelKind, r, sf: float, ell: float):
    s = np.asarray(r, dtype=float) / ell
    if kind is KernelKind.SE:
        return sf * sf * np.exp(-0.5 * s * s)
    if kind is KernelKind.EXP:
        return sf * sf * np.exp(-s)
    if kind is KernelKind.MATERN32:
        return sf * sf * (1.0 + _SQRT3 * s) * np.exp(-_SQRT3 * s)
    if kind is KernelKind.MATERN52:
        return sf * sf * (1.0 + _SQRT5 * s + (5.0 / 3.0) * s * s) * np.exp(-_SQRT5 * s)
    raise ValueError(kind)  # pragma: no cover


def _distances(X1, X2) -> np.ndarray:
    diff = X1[:, None, :] - X2[None, :, :]
    return np.sqrt(np.sum(diff * diff, axis=2))


def kernel_matrix(kind: KernelKind, theta: Hyperparameters, X1, X2) -> np.ndarray:
    """Cross-covariance ``k(X1_i, X2_j)`` (no noise term)."""
    d = theta.dim
    return _kernel_of_distance(kind, _distances(_as_inputs(X1, d), _as_inputs(X2, d)),
                               theta.signal_std, theta.length_scale)


def kernel_eval(kind: KernelKind, theta: Hyperparameters, mu, mu_prime) -> float:
    return float(kernel_matrix(kind, theta, np.reshape(mu, (1, -1)), np.reshape(mu_prime, (1, -1)))[0, 0])


def gram(kind: KernelKind, theta: Hyperparameters, X) -> np.ndarray:
    """Noise-augmented Gram matrix ``k(M, M) + sigma_n^2 I``."""
    X = _as_inputs(X, theta.dim)
    K = kernel_matrix(kind, theta, X, X)
    K[np.diag_indices_from(K)] += theta.noise_std**2
    return K


# jitter escalates by decades from 1e-10 to 1e-6 times sigma_f^2
_JITTERS = (0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6)


def _factor(K: np.ndarray, sf: float):
    for rel in _JITTERS:
        try:
            if rel == 0.0:
                return cholesky_spd(K), 0.0
            jitter = rel * sf * sf
            return cholesky_spd(K + jitter * np.eye(K.shape[0])), jitter
        except NotPositiveDefinite:
            continue
    raise NotPositiveDefinite(f"Gram matrix not factorisable with jitter up to {_JITTERS[-1]} sigma_f^2")


@dataclass(eq=False)
class GPModel:
    """A GP conditioned on training data.

    Treat as immutable: ``factor`` and ``alpha`` are derived from the other
    fields. ``diagnostics`` carries the fit record (restart table etc.)
    and ``clamped`` counts posterior variances clamped to zero.
    """

    kernel: KernelKind
    theta: Hyperparameters
    X: np.ndarray
    y: np.ndarray
    factor: SpdFactor
    alpha: np.ndarray
    jitter: float = 0.0
    diagnostics: dict = field(default_factory=dict)
    clamped: int = 0

    @property
    def n_s(self) -> int:
        return self.X.shape[0]

    @property
    def dim(self) -> int:
        return self.X.shape[1]


def posterior(kind: KernelKind, theta: Hyperparameters, X, y, diagnostics=None) -> GPModel:
    """Condition the GP with fixed hyperparameters on ``(X, y)``."""
    X = _as_inputs(X, theta.dim)
    y = np.asarray(y, dtype=float).ravel()
    if y.shape[0] != X.shape[0]:
        raise DimensionMismatch(f"{X.shape[0]} inputs but {y.shape[0]} outputs")
    if X.shape[0] < 1:
        raise ValueError("need at least one training point")
    F, jitter = _factor(gram(kind, theta, X), theta.signal_std)
    alpha = solve_spd(F, y - theta.mean(X))
    return GPModel(kind, theta, X, y, F, alpha, jitter, dict(diagnostics or {}))


def log_marginal_likelihood(kind: KernelKind, theta: Hyperparameters, X, y) -> float:
    """``-1/2 r^T K^{-1} r - 1/2 log det K - n/2 log 2 pi`` with ``r = y - m(M)``."""
    model = posterior(kind, theta, X, y)
    r = model.y - theta.mean(model.X)
    return float(-0.5 * r @ model.alpha - 0.5 * model.factor.logdet() - 0.5 * model.n_s * _LOG_2PI)


def predict(model: GPModel, points):
    """Posterior mean and variance at one or more points.

    ``points`` is reshaped to ``(-1, d)``; returns two arrays of that
    length. Variances that come out negative through roundoff are clamped
    to zero and counted on the model.
    """
    Xs = _as_inputs(points, model.dim)
    Ks = kernel_matrix(model.kernel, model.theta, Xs, model.X)
    mean = model.theta.mean(Xs) + Ks @ model.alpha
    v = sla.solve_triangular(model.factor.L, Ks.T, lower=True, check_finite=False)
    var = model.theta.signal_std**2 - np.sum(v * v, axis=0)
    neg = var < 0
    if np.any(neg):
        model.clamped += int(np.sum(neg))
        log.debug("clamped %d negative posterior variances", int(np.sum(neg)))
        var = np.where(neg, 0.0, var)
    return mean, var


def confidence_interval(mean, variance, level: float = 0.95):
    """Two-sided normal band ``mean +- z sqrt(variance)``."""
    if not 0.0 < level < 1.0:
        raise ValueError("level must lie in (0, 1)")
    variance = np.asarray(variance, dtype=float)
    if np.any(variance < 0):
        raise ValueError("variance must be nonnegative")
    z = norm.ppf(0.5 * (1.0 + level))
    half = z * np.sqrt(variance)
    return mean - half, mean + half


# --- hyperparameter fitting ---------------------------------------------


@dataclass(frozen=True)
class OptimizerConfig:
    """Settings for the likelihood maximisation.

    ``noise_floor`` is relative to ``std(y)``; ``restarts`` counts the
    deterministic length-scale starts plus seeded random ones.
    """

    seed: int = 0
    restarts: int = 5
    noise_floor: float = 1e-6
    length_starts: tuple = (0.1, 0.5, 1.0, 2.0)
    maxfev: int = 3000
    xatol: float = 1e-6
    fatol: float = 1e-10


def _design(X: np.ndarray) -> np.ndarray:
    H = np.hstack([np.ones((X.shape[0], 1)), X])
    if np.linalg.matrix_rank(H) < H.shape[1]:
        # slope not identifiable: fall back to a constant mean
        H = H[:, :1]
    return H


def _profiled(kind, X, y, H, log_params):
    """Negative profiled log-likelihood and the GLS mean coefficients."""
    sf, ell, sn = np.exp(log_params)
    d = X.shape[1]
    theta = Hyperparameters((0.0,) * (d + 1), sf, ell, sn)
    F, _ = _factor(gram(kind, theta, X), sf)
    L = F.L
    Ht = sla.solve_triangular(L, H, lower=True, check_finite=False)
    yt = sla.solve_triangular(L, y, lower=True, check_finite=False)
    beta, *_ = np.linalg.lstsq(Ht, yt, rcond=None)
    rt = yt - Ht @ beta
    nll = 0.5 * rt @ rt + 0.5 * F.logdet() + 0.5 * X.shape[0] * _LOG_2PI
    return nll, beta


def _full_coeffs(beta, H, d):
    coeffs = np.zeros(d + 1)
    coeffs[: H.shape[1]] = beta
    return coeffs


def fit(X, y, kind: KernelKind, opt: OptimizerConfig | None = None) -> GPModel:
    """Fit hyperparameters by maximising the log marginal likelihood.

    Constant data (``std(y) == 0``) yields a constant-mean model with the
    signal standard deviation at its floor; no optimisation is done.

    Raises
    ------
    OptimizationFailure
        If no restart reaches a finite likelihood.
    """
    opt = opt or OptimizerConfig()
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    y = np.asarray(y, dtype=float).ravel()
    if X.shape[0] != y.shape[0] or X.shape[0] < 1:
        raise DimensionMismatch(f"{X.shape[0]} inputs but {y.shape[0]} outputs")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise ValueError("training data must be finite")
    n, d = X.shape
    H = _design(X)
    span = float(np.max(np.ptp(X, axis=0))) if n > 1 else 1.0
    span = span if span > 0 else 1.0
    scale = float(np.std(y))

    if scale == 0.0:
        theta = Hyperparameters((y[0],) + (0.0,) * d, 1e-8 * max(1.0, abs(y[0])), span, 0.0)
        log.info("constant training outputs: returning constant-mean model")
        return posterior(kind, theta, X, y, {"degenerate": True, "restarts": [], "log_likelihood": float("nan")})

    floor = opt.noise_floor * scale
    bounds = [
        (math.log(1e-8 * scale), math.log(1e3 * scale)),
        (math.log(1e-3 * span), math.log(1e3 * span)),
        (math.log(floor), math.log(scale)),
    ]
    starts = [(scale, f * span, max(floor, 1e-3 * scale)) for f in opt.length_starts]
    rng = np.random.default_rng(opt.seed)
    while len(starts) < opt.restarts:
        starts.append((
            scale * math.exp(rng.uniform(-2.0, 2.0)),
            span * math.exp(rng.uniform(math.log(0.05), math.log(5.0))),
            math.exp(rng.uniform(bounds[2][0], math.log(1e-1 * scale))),
        ))
    starts = starts[: opt.restarts]

    def objective(p):
        try:
            val = _profiled(kind, X, y, H, p)[0]
        except NotPositiveDefinite:
            return 1e300
        return val if np.isfinite(val) else 1e300

    table, best = [], None
    for i, start in enumerate(starts):
        x0 = np.clip(np.log(start), [b[0] for b in bounds], [b[1] for b in bounds])
        res = minimize(objective, x0, method="Nelder-Mead", bounds=bounds,
                       options={"maxfev": opt.maxfev, "xatol": opt.xatol, "fatol": opt.fatol})
        lml = -float(res.fun)
        sf, ell, sn = np.exp(res.x)
        table.append({
            "restart": i, "sf0": start[0], "ell0": start[1], "sn0": start[2],
            "sf": float(sf), "ell": float(ell), "sn": float(sn),
            "log_likelihood": lml, "nfev": int(res.nfev),
        })
        if res.fun < 1e299 and (best is None or res.fun < best[0]):
            best = (float(res.fun), res.x)
    if best is None:
        raise OptimizationFailure(f"all {len(starts)} restarts failed for kernel {kind.value}")

    _, beta = _profiled(kind, X, y, H, best[1])
    sf, ell, sn = (float(v) for v in np.exp(best[1]))
    theta = Hyperparameters(tuple(_full_coeffs(beta, H, d)), sf, ell, sn)
    diag = {"degenerate": False, "restarts": table, "log_likelihood": -best[0]}
    return posterior(kind, theta, X, y, diag)
