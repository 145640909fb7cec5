"""Run configuration: a flat ``key=value`` text file.

Example::

    # crossing problem, second eigenvalue
    problem = crossing
    n_per_dim = 48
    m_s = 3
    train = -0.9:0.1:0.9
    test = default
    kernels = exp, se
    eigen_index = 2

Grid values
    ``default``
        The problem's standard training or test grid.
    ``a:h:b, c, ...``
        1D: comma-separated numbers and inclusive ranges, concatenated.
    ``<1D spec> x <1D spec>``
        2D tensor lattice, first coordinate slowest.
    ``a b; c d; ...``
        2D: explicit points.
    ``random N``
        ``N`` points drawn uniformly from the parameter box with ``test_seed``.

Lines may carry trailing ``#`` comments. Errors name the file and line.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .baselines import BenchCase
from .errors import ConfigError, PevgpError
from .gpr import KernelKind, OptimizerConfig
from .offline import check_grid, default_split, matlab_range
from .pod import DEFAULT_TOL
from .problems import PROBLEMS, ProblemKind, lattice

__all__ = ["RunConfig", "parse_config", "load_config", "parse_grid", "resolved_grids"]


@dataclass(frozen=True)
class RunConfig:
    """Validated run settings.

    ``train`` and ``test`` are ``(n, d)`` arrays; ``raw`` keeps the
    normalized ``key -> value`` text for embedding in archives.
    """

    problem: ProblemKind | None = None
    n_per_dim: int = 32
    m_s: int = 3
    train: np.ndarray | None = None
    test: np.ndarray | None = None
    kernels: tuple = tuple(KernelKind)
    eigen_index: int = 1
    pod_tol: float = DEFAULT_TOL
    n_modes: int | None = None
    seed: int = 0
    restarts: int = 5
    test_seed: int = 42
    level: float = 0.95
    error_at: np.ndarray | None = None
    out: str = "out"
    bench_case: BenchCase = BenchCase.UNIFORM_I
    bench_steps: tuple = (1.0, 0.5)
    raw: dict = field(default_factory=dict, compare=False)

    def optimizer(self) -> OptimizerConfig:
        return OptimizerConfig(seed=self.seed, restarts=self.restarts)

    def require_problem(self) -> ProblemKind:
        if self.problem is None:
            raise ConfigError("config does not set 'problem'")
        return self.problem


_KEYS = {f.name for f in fields(RunConfig)} - {"raw"}


def _number(tok: str, where: str) -> float:
    try:
        v = float(tok)
    except ValueError:
        raise ConfigError(f"{where}: {tok!r} is not a number") from None
    if not math.isfinite(v):
        raise ConfigError(f"{where}: {tok!r} is not finite")
    return v


def _axis(text: str, where: str) -> np.ndarray:
    vals = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            raise ConfigError(f"{where}: empty list entry")
        parts = item.split(":")
        if len(parts) == 1:
            vals.append(np.array([_number(item, where)]))
        elif len(parts) == 3:
            a, h, b = (_number(p.strip(), where) for p in parts)
            if h <= 0 or b < a:
                raise ConfigError(f"{where}: range {item!r} is empty")
            vals.append(matlab_range(a, h, b))
        else:
            raise ConfigError(f"{where}: bad range {item!r}, expected start:step:end")
    return np.concatenate(vals)


def parse_grid(text: str, kind: ProblemKind, *, seed: int = 42, where: str = "grid") -> np.ndarray:
    """Parse a grid value (see module docstring) into an ``(n, d)`` array."""
    info = PROBLEMS[kind]
    d = info.param_dim
    text = text.strip()
    if not text:
        raise ConfigError(f"{where}: empty grid")
    if text.startswith("random"):
        n = text[len("random"):].strip()
        if not n.isdigit() or int(n) < 1:
            raise ConfigError(f"{where}: expected 'random N' with N >= 1")
        lo, hi = np.array(info.param_bounds, dtype=float).T
        return np.random.default_rng(seed).uniform(lo, hi, size=(int(n), d))
    if d == 1:
        pts = _axis(text, where)[:, None]
    elif " x " in text:
        a, _, b = text.partition(" x ")
        ax, ay = _axis(a, where), _axis(b, where)
        pts = lattice([ax, ay])
    else:
        rows = []
        for item in text.split(";"):
            toks = item.replace(",", " ").split()
            if len(toks) != d:
                raise ConfigError(f"{where}: point {item.strip()!r} does not have {d} coordinates")
            rows.append([_number(t, where) for t in toks])
        pts = np.array(rows)
    try:
        check_grid(kind, pts)
    except (PevgpError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from None
    outside = [p.tolist() for p in pts if not info.contains(p)]
    if outside:
        raise ConfigError(f"{where}: {len(outside)} point(s) outside {list(info.param_bounds)}, "
                          f"first {outside[0]}")
    return pts


def _int(v: str, where: str, lo: int = 0) -> int:
    try:
        n = int(v)
    except ValueError:
        raise ConfigError(f"{where}: {v!r} is not an integer") from None
    if n < lo:
        raise ConfigError(f"{where}: must be >= {lo}, got {n}")
    return n


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    """Parse configuration text; ``source`` names the file in error messages."""
    entries: dict[str, tuple[str, str]] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        where = f"{source}:{lineno}"
        key, sep, value = body.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigError(f"{where}: expected key = value")
        if key not in _KEYS:
            raise ConfigError(f"{where}: unknown key {key!r}")
        if key in entries:
            raise ConfigError(f"{where}: duplicate key {key!r}")
        entries[key] = (value, where)

    kw: dict = {}
    problem = None
    if "problem" in entries:
        value, where = entries["problem"]
        try:
            problem = ProblemKind.parse(value)
        except ValueError as exc:
            raise ConfigError(f"{where}: {exc}") from None
        kw["problem"] = problem
    for key in ("n_per_dim", "m_s", "eigen_index", "restarts"):
        if key in entries:
            kw[key] = _int(*entries[key], lo=2 if key == "n_per_dim" else 1)
    for key in ("seed", "test_seed"):
        if key in entries:
            kw[key] = _int(*entries[key])
    if "n_modes" in entries:
        v, where = entries["n_modes"]
        kw["n_modes"] = None if v == "default" else _int(v, where, lo=1)
    if "pod_tol" in entries:
        v, where = entries["pod_tol"]
        kw["pod_tol"] = _number(v, where)
        if not 0 < kw["pod_tol"] < 1:
            raise ConfigError(f"{where}: pod_tol must lie in (0, 1)")
    if "level" in entries:
        v, where = entries["level"]
        kw["level"] = _number(v, where)
        if not 0 < kw["level"] < 1:
            raise ConfigError(f"{where}: level must lie in (0, 1)")
    if "kernels" in entries:
        v, where = entries["kernels"]
        try:
            ks = tuple(KernelKind.parse(t.strip()) for t in v.split(",")) if v != "default" else tuple(KernelKind)
        except ValueError as exc:
            raise ConfigError(f"{where}: {exc}") from None
        if len(set(ks)) != len(ks):
            raise ConfigError(f"{where}: repeated kernel")
        kw["kernels"] = ks
    if "out" in entries:
        kw["out"] = entries["out"][0]
    if "bench_case" in entries:
        v, where = entries["bench_case"]
        try:
            kw["bench_case"] = BenchCase(v.upper())
        except ValueError:
            raise ConfigError(f"{where}: bench_case must be I or II") from None
    if "bench_steps" in entries:
        v, where = entries["bench_steps"]
        steps = tuple(float(x) for x in _axis(v, where))
        if any(h <= 0 for h in steps):
            raise ConfigError(f"{where}: step sizes must be positive")
        kw["bench_steps"] = steps

    test_seed = kw.get("test_seed", 42)
    for key in ("train", "test", "error_at"):
        if key not in entries:
            continue
        v, where = entries[key]
        if problem is None:
            raise ConfigError(f"{where}: {key} needs 'problem' to be set")
        if v == "default":
            if key == "error_at":
                raise ConfigError(f"{where}: error_at has no default")
            split = default_split(problem, seed=test_seed)
            kw[key] = getattr(split, key)
        else:
            kw[key] = parse_grid(v, problem, seed=test_seed, where=where)
    if "m_s" in kw and "eigen_index" in kw and kw["eigen_index"] > kw["m_s"]:
        raise ConfigError(f"{entries['eigen_index'][1]}: eigen_index exceeds m_s")
    raw = {k: v for k, (v, _) in sorted(entries.items())}
    return RunConfig(**kw, raw=raw)


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text, str(path))


def resolved_grids(cfg: RunConfig) -> tuple[np.ndarray, np.ndarray]:
    """Training and test grids, falling back to the problem's defaults."""
    kind = cfg.require_problem()
    split = None
    if cfg.train is None or cfg.test is None:
        split = default_split(kind, seed=cfg.test_seed)
    train = cfg.train if cfg.train is not None else split.train
    test = cfg.test if cfg.test is not None else split.test
    return train, test
