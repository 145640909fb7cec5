"""Binary archives for snapshot sets and trained surrogates.

Layout of one archive file::

    b"PEVSARC1"
    u64 header_length
    header_length bytes of UTF-8 text, one ``key=value`` per line
    for each matrix named in the header's ``matrices`` entry, in order:
        u64 rows, u64 cols, rows*cols f64 values (row-major)

All integers and floats are little-endian. The header lists the matrix
names as ``matrices=name1,name2,...``. Nothing time- or host-dependent is
written, so identical inputs give byte-identical files.
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from . import gpr
from .errors import ArchiveError
from .gpr import Hyperparameters, KernelKind
from .offline import SnapshotSet
from .pod import PODBasis
from .problems import ProblemKind
from .surrogate import SurrogateModel

MAGIC = b"PEVSARC1"
FORMAT_VERSION = "1"

__all__ = [
    "MAGIC",
    "write_archive",
    "read_archive",
    "save_snapshots",
    "load_snapshots",
    "save_surrogate",
    "load_surrogate",
]

_U64 = struct.Struct("<Q")


def write_archive(path, header: dict, matrices: dict) -> None:
    """Write ``header`` (str -> str) and named 2D float matrices to ``path``."""
    names = list(matrices)
    for n in names:
        if "," in n or "\n" in n:
            raise ValueError(f"invalid matrix name {n!r}")
    lines = []
    for k, v in {**header, "matrices": ",".join(names)}.items():
        v = str(v)
        if "=" in k or "\n" in k or "\n" in v:
            raise ValueError(f"invalid header entry {k!r}")
        lines.append(f"{k}={v}")
    text = ("\n".join(lines) + "\n").encode("utf-8")
    parts = [MAGIC, _U64.pack(len(text)), text]
    for n in names:
        a = np.asarray(matrices[n], dtype="<f8")
        if a.ndim == 1:
            a = a[None, :]
        if a.ndim != 2:
            raise ValueError(f"matrix {n!r} must be 1D or 2D")
        parts += [_U64.pack(a.shape[0]), _U64.pack(a.shape[1]), np.ascontiguousarray(a).tobytes()]
    Path(path).write_bytes(b"".join(parts))


def read_archive(path):
    """Inverse of :func:`write_archive`; returns ``(header, matrices)``."""
    data = Path(path).read_bytes()
    if data[:8] != MAGIC:
        raise ArchiveError(f"{path}: not a PEVSARC1 archive")
    try:
        (hlen,) = _U64.unpack_from(data, 8)
        pos = 16 + hlen
        text = data[16:pos].decode("utf-8")
        header = {}
        for line in text.splitlines():
            key, sep, value = line.partition("=")
            if not sep:
                raise ArchiveError(f"{path}: malformed header line {line!r}")
            header[key] = value
        names = [n for n in header.pop("matrices", "").split(",") if n]
        matrices = {}
        for n in names:
            rows, cols = _U64.unpack_from(data, pos)[0], _U64.unpack_from(data, pos + 8)[0]
            pos += 16
            nbytes = 8 * rows * cols
            if pos + nbytes > len(data):
                raise ArchiveError(f"{path}: truncated matrix {n!r}")
            matrices[n] = np.frombuffer(data, dtype="<f8", count=rows * cols, offset=pos).reshape(rows, cols).copy()
            pos += nbytes
    except (struct.error, UnicodeDecodeError, ValueError) as exc:
        raise ArchiveError(f"{path}: corrupt archive ({exc})") from exc
    if pos != len(data):
        raise ArchiveError(f"{path}: {len(data) - pos} trailing bytes")
    return header, matrices


def _require(header, key, path):
    try:
        return header[key]
    except KeyError:
        raise ArchiveError(f"{path}: header lacks {key!r}") from None


def _config_entries(config: dict | None) -> dict:
    return {f"config.{k}": v for k, v in (config or {}).items()}


def save_snapshots(path, snaps: SnapshotSet, config: dict | None = None) -> None:
    header = {
        "version": FORMAT_VERSION,
        "archive": "snapshots",
        "problem": snaps.kind.value,
        "n_per_dim": str(snaps.n_per_dim),
        "m_s": str(snaps.m_s),
        "n_s": str(snaps.n_s),
        **_config_entries(config),
    }
    mats = {"parameters": snaps.parameters, "eigenvalues": snaps.eigenvalues}
    for j in range(snaps.m_s):
        mats[f"vectors{j + 1}"] = snaps.eigenvectors[j]
        mats[f"mass_vectors{j + 1}"] = snaps.mass_vectors[j]
    write_archive(path, header, mats)


def load_snapshots(path) -> SnapshotSet:
    header, m = read_archive(path)
    if header.get("archive") != "snapshots":
        raise ArchiveError(f"{path}: not a snapshot archive")
    m_s = int(_require(header, "m_s", path))
    try:
        return SnapshotSet(
            kind=ProblemKind(_require(header, "problem", path)),
            n_per_dim=int(_require(header, "n_per_dim", path)),
            parameters=m["parameters"],
            eigenvalues=m["eigenvalues"],
            eigenvectors=np.stack([m[f"vectors{j + 1}"] for j in range(m_s)]),
            mass_vectors=np.stack([m[f"mass_vectors{j + 1}"] for j in range(m_s)]),
        )
    except (KeyError, ValueError) as exc:
        raise ArchiveError(f"{path}: inconsistent snapshot archive ({exc})") from exc


_RESTART_COLS = ("restart", "sf0", "ell0", "sn0", "sf", "ell", "sn", "log_likelihood", "nfev")


def save_surrogate(path, model: SurrogateModel, config: dict | None = None) -> None:
    header = {
        "version": FORMAT_VERSION,
        "archive": "model",
        "problem": model.problem.value if model.problem else "",
        "n_per_dim": str(model.n_per_dim),
        "eigen_index": str(model.eigen_index),
        "kernel": model.kernel.value,
        "pod_tol": repr(model.basis.truncation_tol),
        "n_modes": str(model.n_modes),
        **_config_entries(config),
    }
    mats = {
        "train_params": model.train_params,
        "basis": model.basis.basis,
        "singular_values": model.basis.singular_values,
    }
    for k, gp in enumerate(model.models):
        mats[f"gp{k}.y"] = gp.y
        mats[f"gp{k}.theta"] = gp.theta.as_vector()
        d = gp.diagnostics
        mats[f"gp{k}.fit"] = np.array([gp.jitter, d.get("log_likelihood", np.nan), float(d.get("degenerate", False))])
        table = d.get("restarts") or []
        mats[f"gp{k}.restarts"] = (np.array([[r[c] for c in _RESTART_COLS] for r in table])
                                   if table else np.zeros((0, len(_RESTART_COLS))))
    write_archive(path, header, mats)


def load_surrogate(path) -> SurrogateModel:
    header, m = read_archive(path)
    if header.get("archive") != "model":
        raise ArchiveError(f"{path}: not a model archive")
    try:
        kernel = KernelKind(_require(header, "kernel", path))
        n_modes = int(_require(header, "n_modes", path))
        X = m["train_params"]
        models = []
        for k in range(n_modes + 1):
            theta = Hyperparameters.from_vector(m[f"gp{k}.theta"][0])
            jitter, lml, degenerate = m[f"gp{k}.fit"][0]
            table = [dict(zip(_RESTART_COLS, row)) for row in m[f"gp{k}.restarts"]]
            diag = {"degenerate": bool(degenerate), "restarts": table, "log_likelihood": float(lml)}
            models.append(gpr.posterior(kernel, theta, X, m[f"gp{k}.y"][0], diag))
        basis = PODBasis(m["basis"], m["singular_values"][0], float(header["pod_tol"]), int(header["eigen_index"]))
        problem = header.get("problem")
        return SurrogateModel(
            eigen_index=int(header["eigen_index"]),
            kernel=kernel,
            eigenvalue_model=models[0],
            coefficient_models=tuple(models[1:]),
            basis=basis,
            train_params=X,
            problem=ProblemKind(problem) if problem else None,
            n_per_dim=int(header["n_per_dim"]) if header.get("n_per_dim", "None") != "None" else None,
        )
    except (KeyError, ValueError, IndexError) as exc:
        raise ArchiveError(f"{path}: inconsistent model archive ({exc})") from exc


def header_config(header: dict) -> dict:
    """Config entries embedded in an archive header."""
    return {k[len("config."):]: v for k, v in header.items() if k.startswith("config.")}
