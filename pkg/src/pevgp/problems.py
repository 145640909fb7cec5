"""Model parametric eigenvalue problems and their finite element assembly.

All problems live on rectangles discretised by uniform tensor grids with
homogeneous Dirichlet conditions. ``n_per_dim`` counts *elements* per
direction, so each direction carries ``n_per_dim - 1`` interior nodes.
Piecewise-bilinear (1D: piecewise-linear) elements are used throughout;
on a tensor grid every 2D operator below is a sum of Kronecker products
of 1D element matrices, which is how they are assembled. Degrees of
freedom are ordered with the x index outermost, ``k = ix * ny + iy``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from itertools import product

import numpy as np

from .errors import ConvergenceFailure, NotPositiveDefinite, ParameterOutOfRange
from .numkernel import sym_generalized_eig

__all__ = [
    "ProblemKind",
    "ProblemInfo",
    "PROBLEMS",
    "Grid",
    "DiscreteEVP",
    "as_point",
    "assemble",
    "assemble_crossing",
    "assemble_oscillator",
    "assemble_nonaffine",
    "assemble_twoparam",
    "exact_crossing_eigs",
    "diffusion_matrix_twoparam",
    "solve_nonlinear_1d",
    "solve_eigenpairs",
    "mass_matrix",
]


class ProblemKind(enum.Enum):
    CROSSING = "crossing"
    OSCILLATOR = "oscillator"
    NONAFFINE = "nonaffine"
    NONLINEAR_1D = "nonlinear1d"
    TWOPARAM = "twoparam"

    @classmethod
    def parse(cls, name: str) -> "ProblemKind":
        key = name.strip().lower().replace("_", "").replace("-", "")
        for kind in cls:
            if kind.value.replace("_", "") == key or kind.name.lower().replace("_", "") == key:
                return kind
        raise ValueError(f"unknown problem {name!r}; expected one of {[k.value for k in cls]}")


@dataclass(frozen=True)
class ProblemInfo:
    kind: ProblemKind
    param_bounds: tuple  # ((lo, hi), ...) one pair per parameter
    domain: tuple  # ((a, b), ...) one pair per spatial direction

    @property
    def param_dim(self) -> int:
        return len(self.param_bounds)

    @property
    def space_dim(self) -> int:
        return len(self.domain)

    def contains(self, mu, atol=1e-12) -> bool:
        mu = as_point(mu, self.param_dim)
        return all(lo - atol <= m <= hi + atol for m, (lo, hi) in zip(mu, self.param_bounds))


_HALF_PI = 0.5 * math.pi

PROBLEMS = {
    ProblemKind.CROSSING: ProblemInfo(ProblemKind.CROSSING, ((-0.9, 0.9),), ((-1.0, 1.0), (-1.0, 1.0))),
    ProblemKind.OSCILLATOR: ProblemInfo(
        ProblemKind.OSCILLATOR, ((1.0, 9.0),), ((-_HALF_PI, _HALF_PI), (-_HALF_PI, _HALF_PI))
    ),
    ProblemKind.NONAFFINE: ProblemInfo(ProblemKind.NONAFFINE, ((1.0, 8.0),), ((0.0, 1.0), (0.0, 1.0))),
    ProblemKind.NONLINEAR_1D: ProblemInfo(ProblemKind.NONLINEAR_1D, ((1.0, 9.0),), ((0.0, 1.0),)),
    ProblemKind.TWOPARAM: ProblemInfo(ProblemKind.TWOPARAM, ((0.4, 1.4), (0.4, 1.4)), ((0.0, 1.0), (0.0, 1.0))),
}


def as_point(mu, d: int) -> np.ndarray:
    """Coerce a scalar or sequence into a finite parameter vector of length ``d``."""
    p = np.atleast_1d(np.asarray(mu, dtype=float)).ravel()
    if p.shape != (d,):
        raise ValueError(f"expected a parameter of dimension {d}, got {p.shape[0]}")
    if not np.all(np.isfinite(p)):
        raise ValueError("parameter has non-finite coordinates")
    return p


def _check_range(kind: ProblemKind, mu: np.ndarray):
    info = PROBLEMS[kind]
    if not info.contains(mu):
        raise ParameterOutOfRange(f"{kind.value}: parameter {mu.tolist()} outside {list(info.param_bounds)}")


@dataclass(frozen=True)
class Grid:
    """Uniform tensor grid; only interior (free) nodes carry unknowns."""

    bounds: tuple
    n_per_dim: int

    @property
    def dim(self) -> int:
        return len(self.bounds)

    @property
    def h(self) -> tuple:
        return tuple((b - a) / self.n_per_dim for a, b in self.bounds)

    def axis(self, i: int) -> np.ndarray:
        a, b = self.bounds[i]
        return np.linspace(a, b, self.n_per_dim + 1)[1:-1]

    @property
    def n_dofs(self) -> int:
        return (self.n_per_dim - 1) ** self.dim

    def nodes(self) -> np.ndarray:
        """Interior node coordinates, shape ``(n_dofs, dim)``, in dof order."""
        axes = [self.axis(i) for i in range(self.dim)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)


@dataclass(frozen=True)
class DiscreteEVP:
    """Stiffness/mass pair of ``A u = lam B u`` at one parameter."""

    stiffness: np.ndarray
    mass: np.ndarray
    grid: Grid
    parameter: np.ndarray

    @property
    def n(self) -> int:
        return self.stiffness.shape[0]


# --- 1D element matrices on interior nodes -------------------------------


def _stiffness_1d(n: int, h: float) -> np.ndarray:
    m = n - 1
    return (2.0 * np.eye(m) - np.eye(m, k=1) - np.eye(m, k=-1)) / h


def _mass_1d(n: int, h: float) -> np.ndarray:
    m = n - 1
    return h / 6.0 * (4.0 * np.eye(m) + np.eye(m, k=1) + np.eye(m, k=-1))


def _derivative_1d(n: int) -> np.ndarray:
    # D[i, j] = int phi_i' phi_j
    m = n - 1
    return 0.5 * (np.eye(m, k=-1) - np.eye(m, k=1))


_GAUSS3_X, _GAUSS3_W = np.polynomial.legendre.leggauss(3)


def _weighted_mass_1d(n: int, a: float, b: float, weight) -> np.ndarray:
    """``int w phi_i phi_j`` with 3-point Gauss per element."""
    h = (b - a) / n
    m = n - 1
    out = np.zeros((m, m))
    xi = 0.5 * (_GAUSS3_X + 1.0)  # reference coordinate in [0, 1]
    wq = 0.5 * _GAUSS3_W * h
    left, right = 1.0 - xi, xi
    for e in range(n):
        x = a + (e + xi) * h
        wx = weight(x) * wq
        local = np.array(
            [[np.sum(wx * left * left), np.sum(wx * left * right)],
             [np.sum(wx * right * left), np.sum(wx * right * right)]]
        )
        # element e spans nodes e, e+1; interior node k has global index k+1
        for p, gp in enumerate((e - 1, e)):
            if not 0 <= gp < m:
                continue
            for q, gq in enumerate((e - 1, e)):
                if 0 <= gq < m:
                    out[gp, gq] += local[p, q]
    return out


def _check_mesh(n_per_dim: int):
    if int(n_per_dim) != n_per_dim or n_per_dim < 4:
        raise ValueError(f"n_per_dim must be an integer >= 4, got {n_per_dim}")


# --- the model problems --------------------------------------------------


def assemble_crossing(mu, n_per_dim: int, check_range: bool = True) -> DiscreteEVP:
    """``-div(diag(1, 1 + mu) grad u) = lam u`` on ``[-1, 1]^2``."""
    p = as_point(mu, 1)
    if check_range:
        _check_range(ProblemKind.CROSSING, p)
    _check_mesh(n_per_dim)
    grid = Grid(PROBLEMS[ProblemKind.CROSSING].domain, n_per_dim)
    hx, hy = grid.h
    K, M = _stiffness_1d(n_per_dim, hx), _mass_1d(n_per_dim, hx)
    Ky, My = _stiffness_1d(n_per_dim, hy), _mass_1d(n_per_dim, hy)
    A = np.kron(K, My) + (1.0 + p[0]) * np.kron(M, Ky)
    B = np.kron(M, My)
    return DiscreteEVP(A, B, grid, p)


def exact_crossing_eigs(mu, count: int) -> np.ndarray:
    """Smallest ``count`` values of ``pi^2/4 (m^2 + (1 + mu) n^2)``, ``m, n >= 1``."""
    p = as_point(mu, 1)[0]
    if count < 1:
        raise ValueError("count must be positive")
    c = 1.0 + p
    if c <= 0:
        raise ValueError("1 + mu must be positive")
    # the pairs (1, 1..count) bound the answer by 1 + c count^2
    cap = 1.0 + c * count**2
    m, n = np.meshgrid(
        np.arange(1, math.isqrt(int(cap)) + 2),
        np.arange(1, math.isqrt(int(cap / c)) + 2),
        indexing="ij",
    )
    vals = 0.25 * math.pi**2 * (m**2 + (1.0 + p) * n**2)
    return np.sort(vals.ravel())[:count]


def assemble_oscillator(mu, n_per_dim: int, check_range: bool = True) -> DiscreteEVP:
    """``-1/2 lap u + 1/2 mu^2 (x^2 + y^2) u = lam u`` on ``(-pi/2, pi/2)^2``.

    The confining potential is sampled at the nodes and lumped onto the
    diagonal with the row sums of the mass matrix.
    """
    p = as_point(mu, 1)
    if check_range:
        _check_range(ProblemKind.OSCILLATOR, p)
    _check_mesh(n_per_dim)
    grid = Grid(PROBLEMS[ProblemKind.OSCILLATOR].domain, n_per_dim)
    hx, hy = grid.h
    Kx, Mx = _stiffness_1d(n_per_dim, hx), _mass_1d(n_per_dim, hx)
    Ky, My = _stiffness_1d(n_per_dim, hy), _mass_1d(n_per_dim, hy)
    B = np.kron(Mx, My)
    xy = grid.nodes()
    potential = np.sum(xy**2, axis=1) * B.sum(axis=1)
    A = 0.5 * (np.kron(Kx, My) + np.kron(Mx, Ky))
    A[np.diag_indices_from(A)] += 0.5 * p[0] ** 2 * potential
    return DiscreteEVP(A, B, grid, p)


def assemble_nonaffine(mu, n_per_dim: int, check_range: bool = True) -> DiscreteEVP:
    """``-lap u = lam exp(-mu (x^2 + y^2)) u`` on ``(0, 1)^2``.

    The weight factorises as ``exp(-mu x^2) exp(-mu y^2)``, so the weighted
    mass matrix is the Kronecker product of two 1D weighted mass matrices.
    """
    p = as_point(mu, 1)
    if check_range:
        _check_range(ProblemKind.NONAFFINE, p)
    _check_mesh(n_per_dim)
    grid = Grid(PROBLEMS[ProblemKind.NONAFFINE].domain, n_per_dim)
    (ax, bx), (ay, by) = grid.bounds
    hx, hy = grid.h
    A = np.kron(_stiffness_1d(n_per_dim, hx), _mass_1d(n_per_dim, hy)) + np.kron(
        _mass_1d(n_per_dim, hx), _stiffness_1d(n_per_dim, hy)
    )
    w = lambda x: np.exp(-p[0] * x * x)  # noqa: E731
    B = np.kron(_weighted_mass_1d(n_per_dim, ax, bx, w), _weighted_mass_1d(n_per_dim, ay, by, w))
    return DiscreteEVP(A, B, grid, p)


def diffusion_matrix_twoparam(mu) -> np.ndarray:
    """``[[1/mu1^2, 0.7/mu2], [0.7/mu2, 1/mu2^2]]``; raises unless positive definite."""
    m1, m2 = as_point(mu, 2)
    if m1 == 0.0 or m2 == 0.0:
        raise NotPositiveDefinite(f"diffusion matrix undefined at mu={[m1, m2]}")
    a11, a12, a22 = 1.0 / m1**2, 0.7 / m2, 1.0 / m2**2
    if a11 * a22 - a12 * a12 <= 0.0:
        raise NotPositiveDefinite(f"diffusion matrix not positive definite at mu={[m1, m2]}")
    return np.array([[a11, a12], [a12, a22]])


def assemble_twoparam(mu, n_per_dim: int) -> DiscreteEVP:
    """``-div(A(mu) grad u) = lam u`` on ``(0, 1)^2`` with a full diffusion tensor."""
    p = as_point(mu, 2)
    D = diffusion_matrix_twoparam(p)
    _check_mesh(n_per_dim)
    grid = Grid(PROBLEMS[ProblemKind.TWOPARAM].domain, n_per_dim)
    hx, hy = grid.h
    Kx, Mx = _stiffness_1d(n_per_dim, hx), _mass_1d(n_per_dim, hx)
    Ky, My = _stiffness_1d(n_per_dim, hy), _mass_1d(n_per_dim, hy)
    Dx, Dy = _derivative_1d(n_per_dim), _derivative_1d(n_per_dim)
    mixed = np.kron(Dx.T, Dy) + np.kron(Dx, Dy.T)
    A = D[0, 0] * np.kron(Kx, My) + D[1, 1] * np.kron(Mx, Ky) + D[0, 1] * mixed
    B = np.kron(Mx, My)
    return DiscreteEVP(A, B, grid, p)


def assemble(kind: ProblemKind, mu, n_per_dim: int) -> DiscreteEVP:
    """Dispatch to the assembler of a linear problem."""
    if kind is ProblemKind.CROSSING:
        return assemble_crossing(mu, n_per_dim)
    if kind is ProblemKind.OSCILLATOR:
        return assemble_oscillator(mu, n_per_dim)
    if kind is ProblemKind.NONAFFINE:
        return assemble_nonaffine(mu, n_per_dim)
    if kind is ProblemKind.TWOPARAM:
        return assemble_twoparam(mu, n_per_dim)
    raise ValueError(f"{kind.value} is nonlinear and has no single matrix pair; use solve_nonlinear_1d")


# --- nonlinear problem ---------------------------------------------------

_NL_EXPONENT = 7.0 / 3.0


def _nonlinear_operators(n: int):
    h = 1.0 / n
    return _stiffness_1d(n, h), _mass_1d(n, h), h


def nonlinear_linearized_stiffness(mu: float, u: np.ndarray, n: int) -> np.ndarray:
    """``K + mu^2 diag(h |u_i|^{7/3})``: the operator frozen at ``u``."""
    K, _, h = _nonlinear_operators(n)
    return K + np.diag(mu**2 * h * np.abs(u) ** _NL_EXPONENT)


def solve_nonlinear_1d(mu, n: int, tol: float = 1e-10, max_iter: int = 5000,
                       check_range: bool = True, return_info: bool = False):
    """Ground state of ``-u'' + mu^2 |u|^{7/3} u = lam u`` on ``(0, 1)``, ``||u||_M = 1``.

    Self-consistent iteration: freeze the nonlinear coefficient at the
    current iterate, take the lowest eigenpair of the linear problem, and
    mix ``u <- (1 - a) u + a u_new``. The mixing weight starts at 0.5 and
    is halved whenever the update grows, which stops the two-cycle that
    plain mixing falls into for large ``mu``.

    Convergence is declared when the re-solve at the returned ``u``
    reproduces both the eigenvalue (relative) and the eigenvector
    (``M``-norm) within ``tol``.
    """
    p = as_point(mu, 1)
    if check_range:
        _check_range(ProblemKind.NONLINEAR_1D, p)
    if tol <= 0:
        raise ValueError("tol must be positive")
    _check_mesh(n)
    m2 = p[0] ** 2
    K, M, h = _nonlinear_operators(n)
    lam, U = sym_generalized_eig(K, M, 1)
    u = U[:, 0] * np.sign(U[:, 0].sum())
    alpha, prev_step = 0.5, np.inf
    for it in range(1, max_iter + 1):
        A = K + np.diag(m2 * h * np.abs(u) ** _NL_EXPONENT)
        w, V = sym_generalized_eig(A, M, 1)
        v = V[:, 0]
        if v @ (M @ u) < 0:
            v = -v
        d = v - u
        step = math.sqrt(max(d @ (M @ d), 0.0))
        dlam = abs(w[0] - lam[0]) / abs(w[0])
        if step <= tol and dlam <= tol:
            info = {"iterations": it, "alpha": alpha, "step": step}
            return (w[0], u, info) if return_info else (w[0], u)
        if step > prev_step:
            alpha = max(0.5 * alpha, 1.0 / 128)
        prev_step = step
        lam = w
        u = (1.0 - alpha) * u + alpha * v
        u /= math.sqrt(u @ (M @ u))
    raise ConvergenceFailure(f"nonlinear SCF did not converge in {max_iter} iterations at mu={p[0]}")


def solve_eigenpairs(kind: ProblemKind, mu, m_s: int, n_per_dim: int):
    """Lowest ``m_s`` eigenpairs at one parameter.

    Returns ``(eigenvalues, eigenvectors, mass)`` with eigenvectors as
    mass-normalised columns. The nonlinear problem only has its ground
    state available (``m_s == 1``).
    """
    if kind is ProblemKind.NONLINEAR_1D:
        if m_s != 1:
            raise ValueError("the nonlinear problem only provides its ground state (m_s=1)")
        lam, u = solve_nonlinear_1d(mu, n_per_dim)
        _, M, _ = _nonlinear_operators(n_per_dim)
        return np.array([lam]), u[:, None], M
    evp = assemble(kind, mu, n_per_dim)
    w, U = sym_generalized_eig(evp.stiffness, evp.mass, m_s)
    return w, U, evp.mass


def grid_for(kind: ProblemKind, n_per_dim: int) -> Grid:
    return Grid(PROBLEMS[kind].domain, n_per_dim)


def lattice(axes) -> np.ndarray:
    """Row-major tensor lattice of 1D axes, shape ``(prod(len), d)``."""
    return np.array(list(product(*axes)), dtype=float)


def mass_matrix(kind: ProblemKind, mu, n_per_dim: int) -> np.ndarray:
    """Mass matrix ``B(mu)`` alone, e.g. for norms of eigenvector errors."""
    if kind is ProblemKind.NONLINEAR_1D:
        return _nonlinear_operators(n_per_dim)[1]
    return assemble(kind, mu, n_per_dim).mass
