"""Spline interpolation baselines and the spline-versus-GPR benchmark."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from . import gpr
from .errors import DuplicateKnots, OutOfDomain
from .gpr import KernelKind, OptimizerConfig
from .offline import matlab_range

__all__ = [
    "SplineModel",
    "linear_interp",
    "cubic_spline_fit",
    "cubic_spline_eval",
    "test_function",
    "BenchCase",
    "BenchRow",
    "GRID_G",
    "spline_vs_gpr_experiment",
]

#: non-uniform training grid of the second benchmark case
GRID_G = (-4.36, -4.04, -2.44, 1.73, 2.05, 4.94, 5.26, 8.14, 9.10)
BENCH_DOMAIN = (-math.pi, 3.0 * math.pi)
TEST_STEP = 0.01


def _knots(knots, values):
    x = np.asarray(knots, dtype=float).ravel()
    y = np.asarray(values, dtype=float).ravel()
    if x.shape != y.shape:
        raise ValueError(f"{x.size} knots but {y.size} values")
    if x.size < 2:
        raise ValueError("need at least two knots")
    if np.any(np.diff(x) <= 0):
        raise DuplicateKnots("knots must be strictly increasing")
    return x, y


def _check_domain(x, knots):
    if np.any(x < knots[0]) or np.any(x > knots[-1]):
        raise OutOfDomain(f"query outside [{knots[0]}, {knots[-1]}]")


def linear_interp(knots, values, x):
    """Piecewise-linear interpolant through ``(knots, values)`` at ``x``."""
    k, v = _knots(knots, values)
    xq = np.asarray(x, dtype=float)
    _check_domain(xq, k)
    return np.interp(xq, k, v)


@dataclass(frozen=True)
class SplineModel:
    """Natural cubic spline.

    On ``[knots[i], knots[i+1]]`` the spline is
    ``a + b t + c t^2 + d t^3`` with ``t = x - knots[i]`` and
    ``coeffs[i] = (a, b, c, d)``. ``moments`` are the second derivatives
    at the knots (zero at both ends).
    """

    knots: np.ndarray
    values: np.ndarray
    coeffs: np.ndarray
    moments: np.ndarray


def cubic_spline_fit(knots, values) -> SplineModel:
    """Natural cubic spline via the tridiagonal moment equations."""
    x, y = _knots(knots, values)
    h = np.diff(x)
    n = x.size
    M = np.zeros(n)
    if n > 2:
        slopes = np.diff(y) / h
        rhs = 6.0 * np.diff(slopes)
        ab = np.zeros((3, n - 2))
        ab[0, 1:] = h[1:-1]  # super-diagonal
        ab[1, :] = 2.0 * (h[:-1] + h[1:])
        ab[2, :-1] = h[1:-1]  # sub-diagonal
        M[1:-1] = solve_banded((1, 1), ab, rhs)
    a = y[:-1]
    b = np.diff(y) / h - h * (2.0 * M[:-1] + M[1:]) / 6.0
    c = 0.5 * M[:-1]
    d = np.diff(M) / (6.0 * h)
    return SplineModel(x, y, np.column_stack([a, b, c, d]), M)


def cubic_spline_eval(model: SplineModel, x):
    """Evaluate the spline; ``x`` must lie inside the knot range."""
    xq = np.asarray(x, dtype=float)
    _check_domain(xq, model.knots)
    i = np.clip(np.searchsorted(model.knots, xq, side="right") - 1, 0, model.knots.size - 2)
    t = xq - model.knots[i]
    a, b, c, d = (model.coeffs[i, k] for k in range(4))
    return a + t * (b + t * (c + t * d))


def test_function(mu):
    """``1 + sin(mu)/mu`` with the removable singularity ``f(0) = 2``."""
    mu = np.asarray(mu, dtype=float)
    return 1.0 + np.sinc(mu / np.pi)


test_function.__test__ = False  # not a pytest test


class BenchCase(enum.Enum):
    UNIFORM_I = "I"
    NONUNIFORM_II = "II"


@dataclass(frozen=True)
class BenchRow:
    case: str
    method: str
    grid: str
    mse: float
    max_err: float
    excluded: int


def _errors(pred, exact):
    e = pred - exact
    return float(np.mean(e * e)), float(np.max(np.abs(e)))


def _compare(case: str, grid_id: str, knots, f, opt: OptimizerConfig, test):
    y = f(knots)
    exact = f(test)
    rows = []
    model = gpr.fit(knots[:, None], y, KernelKind.SE, opt)
    mean, _ = gpr.predict(model, test[:, None])
    rows.append(BenchRow(case, "gpr_se", grid_id, *_errors(mean, exact), 0))
    inside = (test >= knots[0]) & (test <= knots[-1])
    excluded = int(np.sum(~inside))
    spline = cubic_spline_fit(knots, y)
    rows.append(BenchRow(case, "cubic_spline", grid_id,
                         *_errors(cubic_spline_eval(spline, test[inside]), exact[inside]), excluded))
    rows.append(BenchRow(case, "linear", grid_id,
                         *_errors(linear_interp(knots, y, test[inside]), exact[inside]), excluded))
    return rows


def spline_vs_gpr_experiment(case: BenchCase, steps=(1.0, 0.5), opt: OptimizerConfig | None = None,
                             f=test_function) -> list:
    """Compare SE-kernel GPR with natural cubic and linear interpolation.

    Case I trains on ``-pi:h:3pi`` for each step ``h``; case II on the
    non-uniform grid :data:`GRID_G`. Errors are measured on ``-pi:0.01:3pi``.
    Spline errors only use test points inside the knot range; the number
    left out is reported. GPR is scored on every test point.
    """
    opt = opt or OptimizerConfig()
    test = matlab_range(*BENCH_DOMAIN[:1], TEST_STEP, BENCH_DOMAIN[1])
    if case is BenchCase.UNIFORM_I:
        rows = []
        for h in steps:
            if not h > 0:
                raise ValueError(f"step sizes must be positive, got {h}")
            knots = matlab_range(BENCH_DOMAIN[0], h, BENCH_DOMAIN[1])
            rows.extend(_compare(case.value, repr(float(h)), knots, f, opt, test))
        return rows
    return _compare(case.value, "G", np.array(GRID_G), f, opt, test)
