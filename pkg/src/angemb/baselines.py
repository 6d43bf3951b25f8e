"""Standard PCA and EM-PCA baselines sharing the common model container.

Both fit on centered, un-normalized data. PCA reuses the Gram-side
decomposition engine directly; EM-PCA alternates least-squares updates
of the loading matrix and finishes with an exact rotation to ordered,
sign-canonical components.
"""

from __future__ import annotations

import time

import numpy as np

from .errors import SingularStep
from .linalg import (
    DataMatrix,
    center,
    dominant_of_matrix,
    make_subspace,
    resolve_strategy,
)
from .model import FitModel, FitStats

EM_TOL = 1e-4
EM_MAX_ITER = 1000


def fit_pca(
    X: DataMatrix, d: int, strategy: str = "auto", seed: int = 0
) -> FitModel:
    """Top-d eigenvectors of the (unscaled) sample scatter matrix."""
    t0 = time.perf_counter()
    mean, Xc = center(X)
    sub = dominant_of_matrix(Xc.values, d, strategy=strategy, seed=seed)
    stats = FitStats(
        samples_used=X.n,
        samples_trimmed=0,
        dropped_zero_norm=0,
        wall_time_s=time.perf_counter() - t0,
        strategy_used=resolve_strategy(X.D, X.n, d, strategy),
    )
    return FitModel(mean=mean, subspace=sub, method="pca", fit_stats=stats)


def _em_iterate(Xc: np.ndarray, Q: np.ndarray, tol: float, max_iter: int):
    """Alternate E/M least-squares steps until Q stabilizes.

    Returns (Q, iterations, per-iteration reconstruction errors). The
    error ||Xc − Q·Y||_F is nonincreasing because each half-step solves
    its own least-squares problem exactly.
    """
    errors = []
    iterations = 0
    for _ in range(max_iter):
        iterations += 1
        Y = np.linalg.solve(Q.T @ Q, Q.T @ Xc)
        errors.append(float(np.linalg.norm(Xc - Q @ Y)))
        Q_new = np.linalg.solve(Y @ Y.T, Y @ Xc.T).T
        rel_change = np.linalg.norm(Q_new - Q) / np.linalg.norm(Q)
        Q = Q_new
        if rel_change < tol:
            break
    return Q, iterations, errors


def fit_em_pca(
    X: DataMatrix,
    d: int,
    tol: float = EM_TOL,
    max_iter: int = EM_MAX_ITER,
    seed: int = 0,
) -> FitModel:
    """EM-style PCA from a seeded random start.

    Convergence is measured by the relative Frobenius change of the
    loading matrix. EM recovers a subspace, not ordered components, so
    the loop is followed by orthonormalization and a d×d eigen-rotation
    of Qᵀ·Xc·Xcᵀ·Q to obtain ordered components. A singular inner solve
    triggers one restart with a fresh seeded start before failing.
    """
    t0 = time.perf_counter()
    mean, Xc = center(X)
    rng = np.random.default_rng(seed)
    result = None
    for _ in range(2):
        Q0 = rng.standard_normal((X.D, d))
        try:
            result = _em_iterate(Xc.values, Q0, tol, max_iter)
            break
        except np.linalg.LinAlgError:
            continue
    if result is None:
        raise SingularStep("EM inner d x d solve was singular on both starts")
    Q, iterations, errors = result
    Qo = np.linalg.qr(Q)[0]
    G = Xc.values.T @ Qo
    evals, W = np.linalg.eigh(G.T @ G)
    order = np.argsort(evals)[::-1]
    sub = make_subspace(Qo @ W[:, order], evals[order])
    stats = FitStats(
        samples_used=X.n,
        samples_trimmed=0,
        dropped_zero_norm=0,
        wall_time_s=time.perf_counter() - t0,
        iterations=iterations,
        error_trace=tuple(errors),
    )
    return FitModel(mean=mean, subspace=sub, method="em_pca", fit_stats=stats)
