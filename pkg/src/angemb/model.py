"""Fitted-model container shared by every method, plus its JSON round-trip.

The JSON layout is part of the CLI contract:

    {"method", "d", "D", "mean": [...], "basis": [[column-major]],
     "eigenvalues": [...], "trim": {...}?}

with the optional trim block

    {"eta_theta", "tau_min", "pivot", "outliers": [...], "n_inliers"}.

The per-sample count vector tau is deliberately not serialized; models
loaded from JSON carry ``tau=None``.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidData
from .linalg import Subspace, _owned, make_subspace

METHODS = ("pca", "em_pca", "ae", "tae")


@dataclass(frozen=True)
class TrimReport:
    """Outcome of cosine-threshold pre-trimming.

    Index fields refer to sphere columns (after zero-norm drops), 0-based.
    ``tau[i]`` counts samples whose absolute cosine to sample i falls
    below ``cos_threshold``; the pivot is the smallest index attaining
    the minimum count.
    """

    eta_theta: float
    cos_threshold: float
    tau: np.ndarray | None
    tau_min: int
    pivot: int
    outliers: tuple[int, ...]
    inliers: tuple[int, ...]

    @property
    def n_inliers(self) -> int:
        return len(self.inliers)


@dataclass(frozen=True)
class FitStats:
    """Bookkeeping for one fit; never serialized into model JSON."""

    samples_used: int
    samples_trimmed: int
    dropped_zero_norm: int
    wall_time_s: float
    strategy_used: str | None = None
    iterations: int | None = None
    error_trace: tuple[float, ...] | None = None


@dataclass(frozen=True)
class FitModel:
    """Mean + subspace + method metadata; enough to project and reconstruct."""

    mean: np.ndarray
    subspace: Subspace
    method: str
    trim: TrimReport | None = None
    fit_stats: FitStats | None = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise InvalidData(f"unknown method {self.method!r}")
        if (self.method == "tae") != (self.trim is not None):
            raise InvalidData("trim report present iff method is 'tae'")
        if self.mean.shape != (self.subspace.D,):
            raise InvalidData("mean length does not match basis rows")

    @property
    def D(self) -> int:
        return self.subspace.D

    @property
    def d(self) -> int:
        return self.subspace.d


def trim_to_dict(trim: TrimReport) -> dict:
    return {
        "eta_theta": float(trim.eta_theta),
        "tau_min": int(trim.tau_min),
        "pivot": int(trim.pivot),
        "outliers": [int(i) for i in trim.outliers],
        "n_inliers": trim.n_inliers,
    }


def trim_from_dict(doc: dict) -> TrimReport:
    outliers = tuple(int(i) for i in doc["outliers"])
    m = int(doc["n_inliers"]) + len(outliers)
    inliers = tuple(i for i in range(m) if i not in set(outliers))
    eta = float(doc["eta_theta"])
    return TrimReport(
        eta_theta=eta,
        cos_threshold=math.cos(eta),
        tau=None,
        tau_min=int(doc["tau_min"]),
        pivot=int(doc["pivot"]),
        outliers=outliers,
        inliers=inliers,
    )


def model_to_dict(model: FitModel) -> dict:
    doc = {
        "method": model.method,
        "d": model.d,
        "D": model.D,
        "mean": model.mean.tolist(),
        "basis": model.subspace.basis.T.tolist(),
        "eigenvalues": model.subspace.eigenvalues.tolist(),
    }
    if model.trim is not None:
        doc["trim"] = trim_to_dict(model.trim)
    return doc


def model_from_dict(doc: dict) -> FitModel:
    try:
        basis = np.asarray(doc["basis"], dtype=np.float64).T
        eigenvalues = np.asarray(doc["eigenvalues"], dtype=np.float64)
        mean = np.asarray(doc["mean"], dtype=np.float64)
        method = doc["method"]
        expected = (int(doc["D"]), int(doc["d"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidData(f"malformed model document: {exc}") from exc
    if basis.shape != expected:
        raise InvalidData(f"basis shape {basis.shape} does not match (D, d)={expected}")
    trim = trim_from_dict(doc["trim"]) if "trim" in doc else None
    # No re-canonicalization: bases are stored canonical and must round-trip
    # bit-for-bit (JSON floats use shortest-repr, which is exact).
    subspace = Subspace(basis=_owned(basis), eigenvalues=_owned(eigenvalues))
    return FitModel(mean=_owned(mean), subspace=subspace, method=method, trim=trim)


def model_to_json(model: FitModel) -> str:
    return json.dumps(model_to_dict(model), indent=2) + "\n"


def atomic_write_bytes(path, data: bytes) -> None:
    """Write via a sibling temp file + rename so failures leave no partial file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def save_model(model: FitModel, path) -> None:
    atomic_write_text(path, model_to_json(model))


def load_model(path) -> FitModel:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InvalidData(f"{path}: not valid JSON ({exc})") from exc
    return model_from_dict(doc)
