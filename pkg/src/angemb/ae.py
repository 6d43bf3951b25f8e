"""Angular-embedding estimator: fit, objective, projection, reconstruction.

The fit maximizes the summed squared cosine between unit-normalized
samples and the subspace, i.e. trace(Qᵀ·U·Uᵀ·Q) over orthonormal Q.
Reconstruction applies the fitted directions as an ordinary orthogonal
projector on raw centered data, so outputs stay in the original scale.
"""

from __future__ import annotations

import math
import time
from typing import NamedTuple

import numpy as np

from .errors import InvalidData
from .linalg import (
    DEFAULT_ZERO_TOL,
    DataMatrix,
    SphereData,
    Subspace,
    center,
    dominant_subspace,
    normalize_columns,
    resolve_strategy,
)
from .model import FitModel, FitStats

THEOREM_SWEEP = 3600  # pi/3600 rad = 0.05 degree resolution


def fit_ae(
    X: DataMatrix,
    d: int,
    strategy: str = "auto",
    zero_tol: float = DEFAULT_ZERO_TOL,
    seed: int = 0,
) -> FitModel:
    """Center, map columns to the unit sphere, and fit the top-d directions.

    The stored mean is the full-data mean, so reconstructions are
    comparable across methods regardless of dropped columns.
    """
    t0 = time.perf_counter()
    mean, Xc = center(X)
    U = normalize_columns(Xc, zero_tol)
    sub = dominant_subspace(U, d, strategy=strategy, seed=seed)
    stats = FitStats(
        samples_used=U.m,
        samples_trimmed=0,
        dropped_zero_norm=len(U.dropped),
        wall_time_s=time.perf_counter() - t0,
        strategy_used=resolve_strategy(U.D, U.m, d, strategy),
    )
    return FitModel(mean=mean, subspace=sub, method="ae", fit_stats=stats)


def objective(U: SphereData, Q: Subspace) -> float:
    """trace(Qᵀ·U·Uᵀ·Q) = Σᵢ Σⱼ (uᵢᵀqⱼ)², bounded by [0, m]."""
    if U.D != Q.D:
        raise InvalidData(f"feature counts differ: {U.D} vs {Q.D}")
    return float(np.sum((U.units.T @ Q.basis) ** 2))


def project(model: FitModel, X: DataMatrix) -> np.ndarray:
    """Coordinates Qᵀ·(X − mean), shape d×n."""
    if X.D != model.D:
        raise InvalidData(f"feature counts differ: {X.D} vs {model.D}")
    return model.subspace.basis.T @ (X.values - model.mean[:, None])


def reconstruct(model: FitModel, X: DataMatrix) -> DataMatrix:
    """mean + Q·Qᵀ·(X − mean), in the original data scale."""
    coords = project(model, X)
    values = model.mean[:, None] + model.subspace.basis @ coords
    return DataMatrix.from_array(values)


class PhiRange(NamedTuple):
    max: float
    min: float

    @property
    def spread(self) -> float:
        return self.max - self.min


def theorem1_range(u_i, u_j, sweep: int = THEOREM_SWEEP) -> PhiRange:
    """Range of φ(q) = cos²⟨q,uᵢ⟩ + cos²⟨q,uⱼ⟩ over the plane span{uᵢ,uⱼ}.

    For an exactly orthogonal pair φ is constant; a pair at angle
    π/2 ± ξ moves the objective by at most 2·sin ξ, which is why
    near-orthogonal sample pairs barely influence the fitted direction.
    Sweeps ``sweep`` equally spaced in-plane directions over half a turn
    (cos² is π-periodic).
    """
    u_i = np.asarray(u_i, dtype=np.float64)
    u_j = np.asarray(u_j, dtype=np.float64)
    if u_i.shape != u_j.shape or u_i.ndim != 1:
        raise InvalidData("inputs must be equal-length vectors")
    ni, nj = np.linalg.norm(u_i), np.linalg.norm(u_j)
    if ni == 0.0 or nj == 0.0:
        raise InvalidData("zero-norm input vector")
    if sweep < 2:
        raise InvalidData("sweep must be at least 2")
    b1 = u_i / ni
    w = u_j / nj - (u_j @ b1) / nj * b1
    wn = np.linalg.norm(w)
    if wn <= 1e-12:
        raise InvalidData("input vectors are (anti)parallel")
    b2 = w / wn
    t = np.arange(sweep) * (math.pi / sweep)
    qs = np.outer(b1, np.cos(t)) + np.outer(b2, np.sin(t))
    phi = (u_i / ni @ qs) ** 2 + (u_j / nj @ qs) ** 2
    return PhiRange(max=float(phi.max()), min=float(phi.min()))
