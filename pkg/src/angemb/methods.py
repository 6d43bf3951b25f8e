"""Single dispatch point from a method name to its fit."""

from __future__ import annotations

import math

from .ae import fit_ae
from .baselines import EM_MAX_ITER, EM_TOL, fit_em_pca, fit_pca
from .errors import InvalidData
from .linalg import DEFAULT_ZERO_TOL, DataMatrix
from .model import METHODS, FitModel
from .tae import DEFAULT_BLOCK, fit_tae

DEFAULT_ETA_THETA = math.pi / 3


def fit_method(
    X: DataMatrix,
    method: str,
    d: int,
    eta_theta: float = DEFAULT_ETA_THETA,
    strategy: str = "auto",
    seed: int = 0,
    zero_tol: float = DEFAULT_ZERO_TOL,
    block: int = DEFAULT_BLOCK,
    em_tol: float = EM_TOL,
    em_max_iter: int = EM_MAX_ITER,
) -> FitModel:
    if method == "pca":
        return fit_pca(X, d, strategy=strategy, seed=seed)
    if method == "em_pca":
        return fit_em_pca(X, d, tol=em_tol, max_iter=em_max_iter, seed=seed)
    if method == "ae":
        return fit_ae(X, d, strategy=strategy, zero_tol=zero_tol, seed=seed)
    if method == "tae":
        return fit_tae(
            X, d, eta_theta, strategy=strategy, zero_tol=zero_tol, seed=seed, block=block
        )
    raise InvalidData(f"unknown method {method!r}; expected one of {METHODS}")
