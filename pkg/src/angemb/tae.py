"""Cosine-threshold pre-trimming and the trimmed fit.

Workflow: pairwise absolute cosines → per-sample outlier counts τ →
pivot = smallest argmin of τ → everything below the pivot's cosine
threshold is trimmed → fit on the surviving columns. Trim once, fit once.
"""

from __future__ import annotations

import math
import time
from typing import Iterator

import numpy as np

from .errors import InvalidData, InvalidRank, InvalidThreshold
from .linalg import (
    DEFAULT_ZERO_TOL,
    DataMatrix,
    SphereData,
    center,
    dominant_subspace,
    normalize_columns,
    resolve_strategy,
)
from .model import FitModel, FitStats, TrimReport

# 256 sample rows per block keeps the pairwise-cosine slab a few MB even
# at thousands of samples.
DEFAULT_BLOCK = 256


def _check_eta(eta_theta: float) -> float:
    if not 0.0 < eta_theta < math.pi / 2:
        raise InvalidThreshold(
            f"eta_theta={eta_theta} outside the open interval (0, pi/2)"
        )
    return math.cos(eta_theta)


def cosine_gram(U: SphereData, block: int = DEFAULT_BLOCK) -> Iterator[np.ndarray]:
    """Yield C = Uᵀ·U in row blocks of at most ``block`` rows.

    Peak extra memory is O(block·m) instead of O(m²); concatenating the
    blocks reproduces the full pairwise cosine matrix.
    """
    if block < 1:
        raise InvalidData(f"block must be >= 1, got {block}")
    units = U.units
    for start in range(0, U.m, block):
        yield units[:, start : start + block].T @ units


def outlier_counts(
    U: SphereData, eta_theta: float, block: int = DEFAULT_BLOCK
) -> np.ndarray:
    """τᵢ = #{j : |uᵢᵀuⱼ| < cos(eta_theta)} for every sample i.

    Absolute cosine makes antipodal samples count as the same direction;
    the comparison is strict, and self-pairs never count (|uᵢᵀuᵢ| = 1).
    """
    threshold = _check_eta(eta_theta)
    tau = np.empty(U.m, dtype=np.int64)
    start = 0
    for rows in cosine_gram(U, block):
        stop = start + rows.shape[0]
        tau[start:stop] = np.count_nonzero(np.abs(rows) < threshold, axis=1)
        start = stop
    return tau


def select_inliers(
    U: SphereData, tau: np.ndarray, eta_theta: float
) -> tuple[TrimReport, SphereData]:
    """Pick the pivot row with minimal τ and split columns at its threshold.

    Membership is decided only by the pivot row: column j is an outlier
    iff |u_pivotᵀ·uⱼ| < cos(eta_theta). Ties on τ break to the smallest
    index. The returned sphere data keeps inlier columns in order.
    """
    threshold = _check_eta(eta_theta)
    tau = np.asarray(tau)
    if tau.shape != (U.m,):
        raise InvalidData(f"tau length {tau.shape} does not match m={U.m}")
    pivot = int(np.argmin(tau))
    tau_min = int(tau[pivot])
    pivot_cos = np.abs(U.units[:, pivot] @ U.units)
    outlier_mask = pivot_cos < threshold
    outliers = tuple(int(i) for i in np.flatnonzero(outlier_mask))
    inliers = tuple(int(i) for i in np.flatnonzero(~outlier_mask))
    report = TrimReport(
        eta_theta=float(eta_theta),
        cos_threshold=threshold,
        tau=np.array(tau, dtype=np.int64),
        tau_min=tau_min,
        pivot=pivot,
        outliers=outliers,
        inliers=inliers,
    )
    trimmed = SphereData.from_units(U.units[:, ~outlier_mask])
    return report, trimmed


def sphere_to_source_indices(U: SphereData) -> np.ndarray:
    """Map sphere column index -> original sample index (skips dropped)."""
    return np.setdiff1d(np.arange(U.source_n), np.asarray(U.dropped, dtype=int))


def fit_tae(
    X: DataMatrix,
    d: int,
    eta_theta: float,
    strategy: str = "auto",
    zero_tol: float = DEFAULT_ZERO_TOL,
    seed: int = 0,
    block: int = DEFAULT_BLOCK,
) -> FitModel:
    """Center, normalize, trim outliers at ``eta_theta``, then fit top-d.

    The stored mean is the full-data mean (no re-centering after the
    trim), so reconstructions stay comparable with the untrimmed fit.
    """
    t0 = time.perf_counter()
    mean, Xc = center(X)
    U = normalize_columns(Xc, zero_tol)
    tau = outlier_counts(U, eta_theta, block)
    report, trimmed = select_inliers(U, tau, eta_theta)
    if trimmed.m < d:
        raise InvalidRank(
            f"only {trimmed.m} inliers remain after trimming, need d={d}"
        )
    sub = dominant_subspace(trimmed, d, strategy=strategy, seed=seed)
    stats = FitStats(
        samples_used=trimmed.m,
        samples_trimmed=report.tau_min,
        dropped_zero_norm=len(U.dropped),
        wall_time_s=time.perf_counter() - t0,
        strategy_used=resolve_strategy(trimmed.D, trimmed.m, d, strategy),
    )
    return FitModel(mean=mean, subspace=sub, method="tae", trim=report, fit_stats=stats)
