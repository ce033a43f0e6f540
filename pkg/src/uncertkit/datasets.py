"""Seeded example data and grouped CSV ingestion."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .distributions import Distribution, MultivariateNormal
from .estimation import fit_gaussian, fit_kde
from .exceptions import DomainError, InputError
from .numerics import make_rng

__all__ = ["BlobSpec", "example_csv_path", "generate_blobs", "load_csv_grouped", "write_example_csv"]

FIT_METHODS = ("gaussian", "kde")


@dataclass(frozen=True)
class BlobSpec:
    count: int
    dim: int
    seed: int = 0
    mean_box: float = 10.0
    cov_scale: float = 1.0

    def __post_init__(self):
        if self.count < 1 or self.dim < 1:
            raise DomainError(f"count and dim must be >= 1, got count={self.count}, dim={self.dim}")
        if not self.cov_scale > 0:
            raise DomainError(f"cov_scale must be positive, got {self.cov_scale}")


def generate_blobs(spec: BlobSpec | None = None, **kwargs) -> list[MultivariateNormal]:
    """Random Gaussians with means uniform in the box ``[-mean_box, mean_box]^dim``.

    Covariances are ``cov_scale * (A A^T + 0.1 I)`` with ``A`` having
    i.i.d. ``N(0, 1/dim)`` entries.  All means are drawn first, then one
    ``A`` per blob, from a single generator seeded with ``spec.seed``.
    """
    spec = spec or BlobSpec(**kwargs)
    rng = make_rng(spec.seed)
    means = rng.uniform(-spec.mean_box, spec.mean_box, size=(spec.count, spec.dim))
    out = []
    for i in range(spec.count):
        a = rng.standard_normal((spec.dim, spec.dim)) / math.sqrt(spec.dim)
        cov = spec.cov_scale * (a @ a.T + 0.1 * np.eye(spec.dim))
        out.append(MultivariateNormal(means[i], cov, name=f"blob{i}"))
    return out


def load_csv_grouped(path, group_column: str, fit: str = "gaussian", bandwidth="scott") -> list[Distribution]:
    """Fit one distribution per distinct value of ``group_column``.

    Groups keep the order of their first appearance and the distribution
    name is the group value.  All other columns must be numeric.  Rows are
    counted from 1 for the first data row below the header.
    """
    if fit not in FIT_METHODS:
        raise DomainError(f"fit must be one of {FIT_METHODS}, got {fit!r}")
    path = Path(path)
    try:
        handle = path.open(newline="", encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    with handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if not header:
            raise InputError(f"{path}: missing header row")
        header = [h.strip() for h in header]
        if group_column not in header:
            raise InputError(f"{path}: group column {group_column!r} not found in header {header}")
        gcol = header.index(group_column)
        value_cols = [k for k in range(len(header)) if k != gcol]
        if not value_cols:
            raise InputError(f"{path}: no numeric columns besides {group_column!r}")
        groups: dict[str, list[list[float]]] = {}
        for row_no, row in enumerate(reader, start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise InputError(
                    f"{path}: row {row_no} has {len(row)} fields, expected {len(header)}")
            values = []
            for k in value_cols:
                try:
                    v = float(row[k])
                except ValueError:
                    raise InputError(
                        f"{path}: non-numeric value {row[k]!r} at row {row_no}, column {header[k]!r}"
                    ) from None
                if not math.isfinite(v):
                    raise InputError(f"{path}: non-finite value at row {row_no}, column {header[k]!r}")
                values.append(v)
            groups.setdefault(row[gcol].strip(), []).append(values)
    if not groups:
        raise InputError(f"{path}: no data rows")
    out = []
    for name, rows in groups.items():
        data = np.array(rows)
        if fit == "gaussian":
            if len(rows) < 2:
                raise InputError(
                    f"{path}: group {name!r} has a single row; a Gaussian needs 2 (use --method kde)")
            out.append(fit_gaussian(data, name=name))
        else:
            out.append(fit_kde(data, bandwidth, name=name))
    return out


def write_example_csv(path, seed: int = 7, rows_per_group: int = 40) -> Path:
    """Write the bundled 3-group, 4-column fixture (regenerable from ``seed``)."""
    rng = make_rng(seed)
    blobs = generate_blobs(BlobSpec(count=3, dim=4, seed=seed, mean_box=5.0))
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["group", "x0", "x1", "x2", "x3"])
        for label, blob in zip(("alpha", "beta", "gamma"), blobs):
            data = blob.mean + rng.standard_normal((rows_per_group, 4)) @ blob.cholesky().T
            for r in data:
                w.writerow([label] + [f"{v:.6g}" for v in r])
    return path


def example_csv_path() -> Path:
    """Path of the bundled ``groups3.csv`` fixture (group column ``group``)."""
    return Path(str(resources.files("uncertkit") / "data" / "groups3.csv"))
