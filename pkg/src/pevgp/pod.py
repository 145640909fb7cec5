"""Proper orthogonal decomposition of a snapshot matrix."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSnapshot, DimensionMismatch
from .numkernel import thin_svd

__all__ = ["PODBasis", "pod_basis", "reduce", "reconstruct", "truncation_rank"]

DEFAULT_TOL = 1e-4


@dataclass(frozen=True)
class PODBasis:
    """Leading left singular vectors of a snapshot matrix.

    Attributes
    ----------
    basis : ndarray, shape (n_h, N)
        Orthonormal columns.
    singular_values : ndarray
        All singular values of the snapshot matrix, descending.
    truncation_tol : float
        Relative cutoff used to choose ``N`` (``nan`` if ``N`` was fixed).
    eigen_index : int or None
    """

    basis: np.ndarray
    singular_values: np.ndarray
    truncation_tol: float
    eigen_index: int | None = None

    @property
    def n_modes(self) -> int:
        return self.basis.shape[1]

    @property
    def tail(self) -> float:
        """``sqrt(sum of discarded sigma^2)``."""
        return float(np.sqrt(np.sum(self.singular_values[self.n_modes:] ** 2)))


def truncation_rank(singular_values, tol: float) -> int:
    """Smallest ``N >= 1`` with ``sigma[N] <= tol * sigma[0]`` (0-based ``sigma[N]``)."""
    s = np.asarray(singular_values)
    above = np.nonzero(s > tol * s[0])[0]
    return max(1, int(above[-1]) + 1 if above.size else 1)


def pod_basis(S, tol: float = DEFAULT_TOL, n_modes: int | None = None, eigen_index: int | None = None) -> PODBasis:
    """POD basis of ``S`` (columns are snapshots).

    The rank is the number of singular values above ``tol * sigma_1``,
    at least one and never more than the number of snapshots. Passing
    ``n_modes`` overrides the tolerance.
    """
    S = np.asarray(S, dtype=float)
    if not 0.0 < tol < 1.0:
        raise ValueError(f"tol must lie in (0, 1), got {tol}")
    U, s, _ = thin_svd(S)
    if s[0] == 0.0:
        raise DegenerateSnapshot("snapshot matrix is zero")
    if n_modes is None:
        N = truncation_rank(s, tol)
    else:
        if not 1 <= n_modes <= s.size:
            raise ValueError(f"n_modes must lie in [1, {s.size}], got {n_modes}")
        N, tol = int(n_modes), float("nan")
    return PODBasis(U[:, :N].copy(), s, float(tol), eigen_index)


def reduce(basis: PODBasis, u) -> np.ndarray:
    """Reduced coefficients ``V^T u``; ``u`` may hold several columns."""
    u = np.asarray(u, dtype=float)
    if u.shape[0] != basis.basis.shape[0]:
        raise DimensionMismatch(f"vector has {u.shape[0]} entries, basis has {basis.basis.shape[0]} rows")
    return basis.basis.T @ u


def reconstruct(basis: PODBasis, c) -> np.ndarray:
    """Full-order vector ``V c`` from reduced coefficients."""
    c = np.asarray(c, dtype=float)
    if c.shape[0] != basis.n_modes:
        raise DimensionMismatch(f"expected {basis.n_modes} coefficients, got {c.shape[0]}")
    return basis.basis @ c
