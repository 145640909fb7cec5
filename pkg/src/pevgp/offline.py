"""Offline phase: sweep a parameter grid and collect eigenpair snapshots.

Eigenpairs are tracked by sorted index (the j-th lowest eigenvalue at each
parameter), so eigenvalue crossings show up as kinks in the eigenvalue
curves and as jumps in the eigenvectors.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError, PevgpError
from .problems import PROBLEMS, Grid, ProblemKind, as_point, grid_for, lattice, solve_eigenpairs

__all__ = [
    "SnapshotSet",
    "TrainTestSplit",
    "matlab_range",
    "generate_snapshots",
    "align_signs",
    "default_split",
]


def matlab_range(start: float, step: float, stop: float) -> np.ndarray:
    """``start:step:stop`` with the end included if within 1e-12.

    Values are rounded to 12 decimals so that e.g. ``-0.9:0.1:0.9`` hits
    zero exactly.
    """
    if not step > 0:
        raise ValueError(f"range step must be positive, got {step}")
    if stop < start:
        return np.empty(0)
    n = int(math.floor((stop - start + 1e-12) / step)) + 1
    return np.round(start + step * np.arange(n), 12)


@dataclass(frozen=True)
class TrainTestSplit:
    train: np.ndarray  # (n_train, d)
    test: np.ndarray  # (n_test, d)


@dataclass(frozen=True)
class SnapshotSet:
    """Eigenpairs over a parameter grid.

    ``eigenvalues[i, j-1]`` is the j-th lowest eigenvalue at ``parameters[i]``;
    ``eigenvectors[j-1][:, i]`` is its mass-normalised eigenvector and
    ``mass_vectors[j-1][:, i]`` the same vector multiplied by the mass
    matrix of that parameter (kept so inner products need no matrices).
    """

    kind: ProblemKind
    n_per_dim: int
    parameters: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    mass_vectors: np.ndarray

    @property
    def n_s(self) -> int:
        return self.parameters.shape[0]

    @property
    def m_s(self) -> int:
        return self.eigenvalues.shape[1]

    @property
    def n_h(self) -> int:
        return self.eigenvectors.shape[1]

    @property
    def grid(self) -> Grid:
        return grid_for(self.kind, self.n_per_dim)

    def values(self, j: int) -> np.ndarray:
        return self.eigenvalues[:, self._index(j)]

    def vectors(self, j: int) -> np.ndarray:
        """Snapshot matrix of eigen-index ``j`` (1-based), shape ``(n_h, n_s)``."""
        return self.eigenvectors[self._index(j)]

    def _index(self, j: int) -> int:
        if not 1 <= j <= self.m_s:
            raise IndexError(f"eigen-index {j} outside 1..{self.m_s}")
        return j - 1


def generate_snapshots(kind: ProblemKind, mu_grid, m_s: int, n_per_dim: int, align: bool = True) -> SnapshotSet:
    """Solve for the ``m_s`` lowest eigenpairs at every grid parameter.

    Errors raised by the assembly or the eigensolver are re-raised with the
    offending parameter in the message.
    """
    info = PROBLEMS[kind]
    if m_s < 1:
        raise ValueError("m_s must be at least 1")
    params = np.asarray(mu_grid, dtype=float).reshape(-1, info.param_dim)
    if params.shape[0] == 0:
        raise ConfigError("empty parameter grid")
    for mu in params:
        if not info.contains(mu):
            raise ConfigError(f"parameter {mu.tolist()} outside {list(info.param_bounds)} for {kind.value}")
    lams, vecs, bvecs = [], [], []
    for mu in params:
        try:
            w, U, B = solve_eigenpairs(kind, mu, m_s, n_per_dim)
        except PevgpError as exc:
            raise type(exc)(f"at mu={mu.tolist()}: {exc}") from exc
        lams.append(w)
        vecs.append(U)
        bvecs.append(B @ U)
    snaps = SnapshotSet(
        kind=kind,
        n_per_dim=int(n_per_dim),
        parameters=params,
        eigenvalues=np.array(lams),
        eigenvectors=np.stack(vecs, axis=2).transpose(1, 0, 2).copy(),
        mass_vectors=np.stack(bvecs, axis=2).transpose(1, 0, 2).copy(),
    )
    return align_signs(snaps) if align else snaps


def align_signs(raw: SnapshotSet) -> SnapshotSet:
    """Fix the arbitrary sign of every snapshot eigenvector.

    The first column of each eigen-index gets its largest-magnitude entry
    positive; every following column is flipped if needed so that its
    mass inner product with the previous (already aligned) column is
    nonnegative. Columns are visited in grid order.
    """
    U = raw.eigenvectors.copy()
    BU = raw.mass_vectors.copy()
    for j in range(raw.m_s):
        if raw.n_s == 0:
            continue
        first = U[j, :, 0]
        if first[np.argmax(np.abs(first))] < 0:
            U[j, :, 0] *= -1.0
            BU[j, :, 0] *= -1.0
        for i in range(1, raw.n_s):
            if U[j, :, i - 1] @ BU[j, :, i] < 0:
                U[j, :, i] *= -1.0
                BU[j, :, i] *= -1.0
    return replace(raw, eigenvectors=U, mass_vectors=BU)


def default_split(kind: ProblemKind, seed: int = 42, n_random: int = 30) -> TrainTestSplit:
    """Training and test grids used for each model problem."""
    if kind is ProblemKind.CROSSING:
        tr, te = matlab_range(-0.9, 0.1, 0.9), matlab_range(-0.9, 0.05, 0.9)
    elif kind in (ProblemKind.OSCILLATOR, ProblemKind.NONLINEAR_1D):
        tr, te = matlab_range(1.0, 0.4, 9.0), matlab_range(1.0, 0.2, 9.0)
    elif kind is ProblemKind.NONAFFINE:
        tr, te = matlab_range(1.0, 0.4, 8.0), matlab_range(1.0, 0.2, 8.0)
    elif kind is ProblemKind.TWOPARAM:
        axis = np.linspace(0.4, 1.4, 8)
        rng = np.random.default_rng(seed)
        return TrainTestSplit(lattice([axis, axis]), rng.uniform(0.4, 1.4, size=(n_random, 2)))
    else:  # pragma: no cover
        raise ValueError(kind)
    return TrainTestSplit(tr[:, None], te[:, None])


def check_grid(kind: ProblemKind, points) -> np.ndarray:
    info = PROBLEMS[kind]
    pts = np.asarray(points, dtype=float).reshape(-1, info.param_dim)
    for p in pts:
        as_point(p, info.param_dim)
    return pts
