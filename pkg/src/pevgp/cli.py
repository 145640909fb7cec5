"""Command-line driver.

::

    pevgp snapshots    --config run.cfg [--which train|test]
    pevgp train        --config run.cfg [--kernel exp] [--eigen-index 2] [--snapshots FILE]
    pevgp evaluate     --config run.cfg [--model FILE ...] [--test-archive FILE]
    pevgp spline-bench --config run.cfg [--case I|II]

Every subcommand also takes ``--out DIR`` and ``--seed N``, which override
the config. Output file names derive from the problem, eigen-index and
kernel, so commands chain without extra arguments. Exit status is 0 on
success, 2 for usage, configuration or archive errors and 3 for numerical
failures.
"""
from __future__ import annotations

import argparse
import csv
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np
from scipy.stats import norm

from . import archive
from .baselines import BenchCase, spline_vs_gpr_experiment
from .config import RunConfig, load_config, resolved_grids
from .errors import ConfigError, NumericalError, PevgpError
from .gpr import KernelKind
from .offline import SnapshotSet, generate_snapshots
from .surrogate import evaluate_surrogate, train_surrogate

__all__ = ["main", "build_parser", "write_csv", "read_csv"]

log = logging.getLogger("pevgp")

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL = 0, 2, 3


# --- CSV ----------------------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % v
    return str(v)


def write_csv(path, header, rows) -> None:
    """Write rows with floats rendered to 17 significant digits."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])


def read_csv(path) -> tuple[list, list]:
    """``(header, rows)``; numeric cells become floats."""
    def conv(s):
        try:
            return float(s)
        except ValueError:
            return s

    with open(path, newline="", encoding="utf-8") as fh:
        r = csv.reader(fh)
        header = next(r)
        return header, [[conv(c) for c in row] for row in r]


# --- helpers ------------------------------------------------------------------

def _mu_cols(d: int) -> list:
    return ["mu"] if d == 1 else [f"mu{i + 1}" for i in range(d)]


def _snap_path(out: Path, cfg: RunConfig, which: str) -> Path:
    return out / f"snapshots_{cfg.require_problem().value}_{which}.pevs"


def _tag(problem, j: int, kernel: KernelKind) -> str:
    return f"{problem.value}_j{j}_{kernel.value}"


def _kernels(args, cfg: RunConfig) -> tuple:
    return (KernelKind.parse(args.kernel),) if args.kernel else cfg.kernels


def _effective_config(args) -> RunConfig:
    cfg = load_config(args.config)
    raw = dict(cfg.raw)
    if args.seed is not None:
        if args.seed < 0:
            raise ConfigError("--seed must be non-negative")
        cfg = replace(cfg, seed=args.seed)
        raw["seed"] = str(args.seed)
    if args.eigen_index is not None:
        if args.eigen_index < 1:
            raise ConfigError("--eigen-index must be at least 1")
        cfg = replace(cfg, eigen_index=args.eigen_index)
        raw["eigen_index"] = str(args.eigen_index)
    if args.out is not None:
        cfg = replace(cfg, out=args.out)
    raw.pop("out", None)  # output location does not affect results
    return replace(cfg, raw=dict(sorted(raw.items())))


# --- commands -----------------------------------------------------------------

def cmd_snapshots(cfg: RunConfig, which: str = "train") -> Path:
    """Solve the eigenproblems on the training (or test) grid and archive them."""
    kind = cfg.require_problem()
    train, test = resolved_grids(cfg)
    grid = train if which == "train" else test
    snaps = generate_snapshots(kind, grid, cfg.m_s, cfg.n_per_dim)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    path = _snap_path(out, cfg, which)
    archive.save_snapshots(path, snaps, {**cfg.raw, "which": which})
    log.info("wrote %s (%d parameters x %d eigenpairs)", path, snaps.n_s, snaps.m_s)
    return path


_DIAG_COLS = ("restart", "sf0", "ell0", "sn0", "sf", "ell", "sn", "log_likelihood", "nfev")


def cmd_train(cfg: RunConfig, kernels, snapshots: Path | None = None) -> list:
    """Fit one surrogate per kernel for ``cfg.eigen_index``; returns archive paths."""
    out = Path(cfg.out)
    src = snapshots or _snap_path(out, cfg, "train")
    snaps = archive.load_snapshots(src)
    if cfg.problem is not None and snaps.kind is not cfg.problem:
        raise ConfigError(f"{src} holds {snaps.kind.value}, config says {cfg.problem.value}")
    j = cfg.eigen_index
    if not 1 <= j <= snaps.m_s:
        raise ConfigError(f"eigen-index {j} outside 1..{snaps.m_s} of {src}")
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for kernel in kernels:
        model = train_surrogate(snaps, j, kernel, pod_tol=cfg.pod_tol, opt=cfg.optimizer(), n_modes=cfg.n_modes)
        tag = _tag(snaps.kind, j, kernel)
        path = out / f"model_{tag}.pevs"
        archive.save_surrogate(path, model, {**cfg.raw, "kernel": kernel.value})
        rows = []
        for k, gp in enumerate(model.models):
            best = gp.diagnostics.get("log_likelihood")
            for r in gp.diagnostics.get("restarts") or []:
                rows.append([k, *(r[c] for c in _DIAG_COLS), int(r["log_likelihood"] == best)])
        write_csv(out / f"diagnostics_{tag}.csv", ["output", *_DIAG_COLS, "selected"], rows)
        log.info("wrote %s (%d coefficient models)", path, model.n_modes)
        paths.append(path)
    return paths


def _reference_set(models, cfg: RunConfig, test_archive: Path | None) -> SnapshotSet:
    m0 = models[0]
    if test_archive is not None:
        return archive.load_snapshots(test_archive)
    _, test = resolved_grids(replace(cfg, problem=m0.problem))
    m_s = max([cfg.m_s] + [m.eigen_index for m in models])  # same solves as the snapshots command
    return generate_snapshots(m0.problem, test, m_s, m0.n_per_dim)


def cmd_evaluate(cfg: RunConfig, model_paths, test_archive: Path | None = None) -> list:
    """Compare surrogates against reference solves and write the reports."""
    models = [archive.load_surrogate(p) for p in model_paths]
    keys = {(m.problem, m.n_per_dim, m.eigen_index) for m in models}
    if len(keys) != 1:
        raise ConfigError("models differ in problem, mesh or eigen-index; evaluate them separately")
    m0 = models[0]
    test = _reference_set(models, cfg, test_archive)
    err_set = None
    if cfg.error_at is not None:
        err_set = generate_snapshots(m0.problem, cfg.error_at, m0.eigen_index, m0.n_per_dim)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    d = test.parameters.shape[1]
    mu_cols = _mu_cols(d)
    nodes = test.grid.nodes()
    x_cols = ["x", "y"][: nodes.shape[1]]
    written, summary = [], []
    for model in models:
        rep = evaluate_surrogate(model, test, level=cfg.level)
        tag = _tag(model.problem, model.eigen_index, model.kernel)
        p = out / f"eigenvalues_{tag}.csv"
        write_csv(p, [*mu_cols, "lambda_fem", "lambda_gpr", "rel_err", "ci_lo", "ci_hi"],
                  [[*mu, a, b, c, lo, hi] for mu, a, b, c, lo, hi in
                   zip(rep.parameters, rep.reference, rep.predicted, rep.rel_err, rep.ci_lo, rep.ci_hi)])
        written.append(p)

        # coefficient curves with the reference projection in the same gauge
        V = model.basis.basis
        ref_c = V.T @ test.vectors(model.eigen_index)
        sign = np.sign(np.sum(ref_c * rep.coefficients.T, axis=0))
        ref_c *= np.where(sign == 0, 1.0, sign)
        z = norm.ppf(0.5 + cfg.level / 2)
        header = list(mu_cols)
        for k in range(model.n_modes):
            header += [f"c{k + 1}_fem", f"c{k + 1}_gpr", f"c{k + 1}_lo", f"c{k + 1}_hi"]
        rows = []
        for i, mu in enumerate(rep.parameters):
            row = list(mu)
            for k in range(model.n_modes):
                c, s = rep.coefficients[i, k], np.sqrt(rep.coefficient_variances[i, k])
                row += [ref_c[k, i], c, c - z * s, c + z * s]
            rows.append(row)
        p = out / f"coefficients_{tag}.csv"
        write_csv(p, header, rows)
        written.append(p)

        if err_set is not None:
            erep, fields = evaluate_surrogate(model, err_set, level=cfg.level, error_fields=True)
            for i, (mu, e) in enumerate(zip(erep.parameters, fields)):
                p = out / f"eigvec_error_{tag}_pt{i + 1}.csv"
                write_csv(p, [*x_cols, "error"], [[*x, v] for x, v in zip(nodes, e)])
                written.append(p)
        summary.append([model.kernel.value, model.eigen_index, model.n_modes, len(rep.reference), rep.rrmse,
                        float(np.max(rep.rel_err)), float(np.max(rep.eigvec_l2)), float(np.max(rep.eigvec_max))])
        log.info("%s: RRMSE %.3e", tag, rep.rrmse)
    summary.sort(key=lambda r: r[4])
    p = out / f"rrmse_{m0.problem.value}_j{m0.eigen_index}.csv"
    write_csv(p, ["kernel", "eigen_index", "n_modes", "n_test", "rrmse", "max_rel_err", "max_eigvec_l2",
                  "max_eigvec_max"], summary)
    written.append(p)
    return written


def cmd_spline_bench(cfg: RunConfig, case: BenchCase) -> Path:
    rows = spline_vs_gpr_experiment(case, steps=cfg.bench_steps, opt=cfg.optimizer())
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    p = out / f"spline_bench_{case.value}.csv"
    write_csv(p, ["case", "method", "step_size_or_grid_id", "mse", "max_err", "excluded_points"],
              [[r.case, r.method, r.grid, r.mse, r.max_err, r.excluded] for r in rows])
    log.info("wrote %s", p)
    return p


# --- entry point --------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, metavar="PATH", help="key=value run configuration")
    common.add_argument("--out", metavar="DIR", help="output directory (overrides config 'out')")
    common.add_argument("--kernel", metavar="NAME", help="one of se, exp, matern32, matern52")
    common.add_argument("--eigen-index", type=int, metavar="J", help="1-based eigenpair index")
    common.add_argument("--seed", type=int, metavar="N", help="optimizer seed")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="pevgp", description="GPR surrogates for parametric eigenvalue problems")
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("snapshots", parents=[common], help="solve and archive high-fidelity eigenpairs")
    s.add_argument("--which", choices=("train", "test"), default="train")
    s = sub.add_parser("train", parents=[common], help="fit surrogates from a snapshot archive")
    s.add_argument("--snapshots", type=Path, metavar="FILE")
    s = sub.add_parser("evaluate", parents=[common], help="score surrogates on a test set")
    s.add_argument("--model", type=Path, action="append", metavar="FILE")
    s.add_argument("--test-archive", type=Path, metavar="FILE")
    s = sub.add_parser("spline-bench", parents=[common], help="spline versus GPR interpolation benchmark")
    s.add_argument("--case", choices=("I", "II"))
    return p


def _run(args) -> None:
    cfg = _effective_config(args)
    if args.command == "snapshots":
        cmd_snapshots(cfg, args.which)
    elif args.command == "train":
        cmd_train(cfg, _kernels(args, cfg), args.snapshots)
    elif args.command == "evaluate":
        paths = args.model
        if not paths:
            kind = cfg.require_problem()
            paths = [Path(cfg.out) / f"model_{_tag(kind, cfg.eigen_index, k)}.pevs" for k in _kernels(args, cfg)]
        cmd_evaluate(cfg, paths, args.test_archive)
    else:
        cmd_spline_bench(cfg, BenchCase(args.case) if args.case else cfg.bench_case)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        _run(args)
    except NumericalError as exc:
        print(f"pevgp: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (PevgpError, ValueError, OSError) as exc:
        print(f"pevgp: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
