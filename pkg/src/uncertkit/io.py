"""Versioned JSON persistence of distribution lists and embeddings.

Schema (version 1)::

    {"version": 1,
     "distributions": [
        {"kind": "normal", "name": "A", "mean": [...], "cov": [[...], ...]},
        {"kind": "mixture", "weights": [...], "components": [<normal>, ...]},
        {"kind": "samples", "data": [[...], ...]}],
     "maps": [{"matrix": [[...]], "offset": [...]}],      # embeddings only
     "provenance": {...}}                                   # optional

Floats are written with Python's shortest round-trip representation, so a
load after a save reproduces every value bit for bit.
"""
from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .distributions import AffineMap, Distribution, EmpiricalSamples, GaussianMixture, MultivariateNormal
from .exceptions import InputError
from .numerics import min_eigenvalue

__all__ = [
    "FORMAT_VERSION",
    "dump_distributions",
    "load_distributions",
    "load_document",
    "parse_distributions",
    "save_distributions",
    "save_embedding",
]

FORMAT_VERSION = 1
KINDS = ("normal", "mixture", "samples")
SYMMETRY_TOL = 1e-8
PSD_LOAD_TOL = 1e-8


def _normal_record(g: MultivariateNormal, with_name=True) -> dict:
    rec = {"kind": "normal"}
    if with_name and g.name is not None:
        rec["name"] = g.name
    rec["mean"] = g.mean.tolist()
    rec["cov"] = g.cov.tolist()
    return rec


def distribution_record(dist: Distribution) -> dict:
    if isinstance(dist, MultivariateNormal):
        return _normal_record(dist)
    rec = {"kind": dist.kind}
    if dist.name is not None:
        rec["name"] = dist.name
    if isinstance(dist, GaussianMixture):
        rec["weights"] = dist.weights.tolist()
        rec["components"] = [_normal_record(c, with_name=False) for c in dist.components]
    elif isinstance(dist, EmpiricalSamples):
        rec["data"] = dist.data.tolist()
    else:
        raise TypeError(f"cannot serialize {type(dist).__name__}")
    return rec


def dump_distributions(dists, provenance: dict | None = None, maps=None) -> str:
    doc = {"version": FORMAT_VERSION, "distributions": [distribution_record(d) for d in dists]}
    if maps is not None:
        doc["maps"] = [{"matrix": m.matrix.tolist(), "offset": m.offset.tolist()} for m in maps]
    if provenance:
        doc["provenance"] = provenance
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def write_text_atomic(path, text: str):
    """Write ``text`` to ``path`` through a temporary file in the same directory."""
    path = Path(path)
    try:
        fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent or ".")
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write {path}: {exc.strerror}") from exc


def save_distributions(dists, path, provenance: dict | None = None):
    write_text_atomic(path, dump_distributions(list(dists), provenance))


def save_embedding(result, path, provenance: dict | None = None):
    """Save an :class:`~uncertkit.transforms.EmbeddingResult` with its maps."""
    write_text_atomic(path, dump_distributions(result.distributions, provenance, result.maps))


def _matrix(value, what: str, where: str) -> np.ndarray:
    try:
        arr = np.array(value, dtype=float)
    except (TypeError, ValueError):
        raise InputError(f"{where}: {what} is not a numeric matrix") from None
    if arr.ndim != 2:
        raise InputError(f"{where}: {what} must be a 2D array, got {arr.ndim}D")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{where}: {what} contains non-finite values")
    return arr


def _vector(value, what: str, where: str) -> np.ndarray:
    try:
        arr = np.array(value, dtype=float)
    except (TypeError, ValueError):
        raise InputError(f"{where}: {what} is not a numeric vector") from None
    if arr.ndim != 1 or not np.all(np.isfinite(arr)):
        raise InputError(f"{where}: {what} must be a finite 1D array")
    return arr


def _parse_normal(rec: dict, where: str, name=None) -> MultivariateNormal:
    mean = _vector(rec.get("mean"), "mean", where)
    cov = _matrix(rec.get("cov"), "cov", where)
    if cov.shape != (mean.size, mean.size):
        raise InputError(f"{where}: cov shape {cov.shape} does not match mean length {mean.size}")
    scale = max(1.0, float(np.max(np.abs(cov))))
    if np.max(np.abs(cov - cov.T)) > SYMMETRY_TOL * scale:
        raise InputError(f"{where}: covariance is not symmetric (tolerance {SYMMETRY_TOL})")
    lam = min_eigenvalue(cov)
    if lam < -PSD_LOAD_TOL * max(1.0, float(np.linalg.norm(cov))):
        raise InputError(f"{where}: covariance is not positive semi-definite (eigenvalue {lam:.6g})")
    return MultivariateNormal(mean, cov, name=name)


def parse_distribution(rec, where: str) -> Distribution:
    if not isinstance(rec, dict):
        raise InputError(f"{where}: expected an object")
    kind = rec.get("kind")
    name = rec.get("name")
    if name is not None and not isinstance(name, str):
        raise InputError(f"{where}: name must be a string")
    if kind == "normal":
        return _parse_normal(rec, where, name)
    if kind == "mixture":
        comps = rec.get("components")
        if not isinstance(comps, list) or not comps:
            raise InputError(f"{where}: mixture needs a non-empty component list")
        parsed = []
        for k, c in enumerate(comps):
            cw = f"{where}.components[{k}]"
            if not isinstance(c, dict) or c.get("kind", "normal") != "normal":
                raise InputError(f"{cw}: mixture components must be normal records")
            parsed.append(_parse_normal(c, cw))
        weights = _vector(rec.get("weights"), "weights", where)
        if weights.size != len(parsed) or np.any(weights < 0):
            raise InputError(f"{where}: need one non-negative weight per component")
        return GaussianMixture(weights, parsed, name=name)
    if kind == "samples":
        return EmpiricalSamples(_matrix(rec.get("data"), "data", where), name=name)
    raise InputError(f"{where}: unknown distribution kind {kind!r}; expected one of {KINDS}")


def parse_distributions(doc) -> list[Distribution]:
    if not isinstance(doc, dict):
        raise InputError("distribution file must contain a JSON object")
    version = doc.get("version")
    if version != FORMAT_VERSION:
        raise InputError(f"unsupported distribution file version {version!r} (expected {FORMAT_VERSION})")
    items = doc.get("distributions")
    if not isinstance(items, list):
        raise InputError("'distributions' must be a list")
    return [parse_distribution(rec, f"distributions[{i}]") for i, rec in enumerate(items)]


def load_document(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None


def load_distributions(path) -> list[Distribution]:
    """Read and validate a distribution file written by :func:`save_distributions`."""
    return parse_distributions(load_document(path))


def load_maps(path) -> list[AffineMap] | None:
    doc = load_document(path)
    if "maps" not in doc:
        return None
    return [AffineMap(m["matrix"], m["offset"]) for m in doc["maps"]]
