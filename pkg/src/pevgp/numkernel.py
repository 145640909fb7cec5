"""Dense linear-algebra primitives.

Everything here works on dense ``float64`` numpy arrays. The LAPACK
routines are reached through :mod:`scipy.linalg`; this module only adds
the contracts the rest of the package relies on (error types, ordering,
normalisation).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
from scipy.linalg import lapack

from .errors import ConvergenceFailure, DimensionMismatch, NotPositiveDefinite

__all__ = [
    "SpdFactor",
    "cholesky_spd",
    "solve_spd",
    "sym_generalized_eig",
    "thin_svd",
]

_SYM_RTOL = 1e-12


def _as_square(M, name="matrix"):
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] < 1:
        raise DimensionMismatch(f"{name} must be a nonempty square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{name} has non-finite entries")
    return M


def _check_symmetric(M, name):
    scale = np.linalg.norm(M)
    if np.linalg.norm(M - M.T) > _SYM_RTOL * max(scale, np.finfo(float).tiny):
        raise ValueError(f"{name} is not symmetric")


@dataclass(frozen=True)
class SpdFactor:
    """Lower Cholesky factor ``L`` with ``A = L @ L.T``."""

    L: np.ndarray

    @property
    def n(self) -> int:
        return self.L.shape[0]

    def logdet(self) -> float:
        """``log det A`` from the factor diagonal."""
        return 2.0 * float(np.sum(np.log(np.diag(self.L))))

    def reconstruct(self) -> np.ndarray:
        return self.L @ self.L.T


def cholesky_spd(M) -> SpdFactor:
    """Cholesky factorisation of a symmetric positive definite matrix.

    Raises
    ------
    NotPositiveDefinite
        If a pivot is not strictly positive.
    """
    M = _as_square(M)
    _check_symmetric(M, "matrix")
    try:
        L = sla.cholesky(M, lower=True, check_finite=False)
    except sla.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from exc
    if not np.all(np.diag(L) > 0):
        raise NotPositiveDefinite("nonpositive pivot in Cholesky factor")
    return SpdFactor(L)


def solve_spd(F: SpdFactor, b) -> np.ndarray:
    """Solve ``A x = b`` given ``F = cholesky_spd(A)``. ``b`` may be a matrix."""
    b = np.asarray(b, dtype=float)
    if b.shape[0] != F.n:
        raise DimensionMismatch(f"right-hand side has {b.shape[0]} rows, factor is {F.n}x{F.n}")
    return sla.cho_solve((F.L, True), b, check_finite=False)


def sym_generalized_eig(A, B, k: int):
    """Lowest ``k`` eigenpairs of the symmetric-definite pencil ``A u = lam B u``.

    The pencil is reduced to standard form with ``B = L L^T`` and
    ``C = L^{-1} A L^{-T}``; the standard problem is solved by a symmetric
    tridiagonal QR/RRR driver and the vectors are mapped back.

    Returns
    -------
    eigenvalues : ndarray, shape (k,)
        Ascending.
    eigenvectors : ndarray, shape (n, k)
        B-orthonormal columns.
    """
    A = _as_square(A, "A")
    B = _as_square(B, "B")
    n = A.shape[0]
    if B.shape != A.shape:
        raise DimensionMismatch(f"A is {A.shape}, B is {B.shape}")
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in [1, {n}], got {k}")
    _check_symmetric(A, "A")
    F = cholesky_spd(B)
    L = F.L
    # LAPACK sygst forms the lower triangle of L^{-1} A L^{-T} in place
    C, info = lapack.dsygst(np.array(A, order="F"), L, itype=1, lower=1, overwrite_a=1)
    if info != 0:
        raise ConvergenceFailure(f"reduction to standard form failed (info={info})")
    try:
        w, Y = sla.eigh(C, lower=True, subset_by_index=[0, k - 1], check_finite=False, overwrite_a=True)
    except sla.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    U = sla.solve_triangular(L, Y, lower=True, trans="T", check_finite=False)
    return w, U


def thin_svd(S):
    """Economy SVD ``S = U diag(s) Vt`` with descending singular values."""
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.size == 0:
        raise DimensionMismatch(f"expected a nonempty matrix, got shape {S.shape}")
    try:
        U, s, Vt = np.linalg.svd(S, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    return U, s, Vt.T
