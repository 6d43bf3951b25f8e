"""Centering, hypersphere normalization, and dominant-subspace extraction.

All decompositions run on a symmetric Gram matrix, never on a general SVD
of the data: either M·Mᵀ (feature side, D×D) or Mᵀ·M (sample side, m×m),
whichever is smaller. A seeded randomized range finder covers the case
where both sides are large but few components are wanted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    EmptyAfterNormalization,
    InvalidData,
    InvalidRank,
    RankDeficient,
)

DEFAULT_ZERO_TOL = 1e-12
# Sample-side eigenpairs at or below this are treated as numerically null.
RANK_EPS = 1e-12
# "auto" switches to the randomized path above this matrix side...
RANDOMIZED_MIN_SIDE = 1024
# ...but only when the requested rank is this small relative to min(D, m).
RANDOMIZED_MAX_RANK_FRACTION = 0.1
DEFAULT_OVERSAMPLE = 10
DEFAULT_POWER_ITERS = 2

STRATEGIES = ("auto", "d_path", "n_path", "randomized")


def _owned(values, dtype=np.float64) -> np.ndarray:
    """Copy into a C-contiguous read-only array (types are share-safe)."""
    arr = np.array(values, dtype=dtype, order="C")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class DataMatrix:
    """Column-major sample collection: ``values`` is D×n, one sample per column.

    ``mean`` is the per-feature mean that was subtracted to produce
    ``values``; it stays all-zero until :func:`center` runs.
    """

    values: np.ndarray
    mean: np.ndarray

    @classmethod
    def from_array(cls, values, mean=None) -> "DataMatrix":
        arr = np.asarray(values, dtype=np.float64)
        if arr.ndim != 2:
            raise InvalidData(f"expected a 2-D array, got ndim={arr.ndim}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise InvalidData(f"matrix must be at least 1x1, got shape {arr.shape}")
        bad = np.argwhere(~np.isfinite(arr))
        if bad.size:
            r, c = bad[0]
            raise InvalidData(f"non-finite entry at row {r}, column {c}")
        if mean is None:
            mean = np.zeros(arr.shape[0])
        mean = np.asarray(mean, dtype=np.float64)
        if mean.shape != (arr.shape[0],):
            raise InvalidData(
                f"mean length {mean.shape} does not match feature count {arr.shape[0]}"
            )
        return cls(values=_owned(arr), mean=_owned(mean))

    @property
    def D(self) -> int:
        return self.values.shape[0]

    @property
    def n(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class SphereData:
    """Unit-norm columns on the (D−1)-sphere.

    ``dropped`` lists source columns excluded for (near-)zero norm, so
    ``m + len(dropped) == source_n``.
    """

    units: np.ndarray
    dropped: tuple[int, ...] = ()
    source_n: int = field(default=0)

    @classmethod
    def from_units(cls, units, dropped=(), source_n=None) -> "SphereData":
        arr = np.asarray(units, dtype=np.float64)
        dropped = tuple(int(i) for i in dropped)
        if any(b <= a for a, b in zip(dropped, dropped[1:])):
            raise InvalidData("dropped indices must be strictly increasing")
        if source_n is None:
            source_n = arr.shape[1] + len(dropped)
        if arr.shape[1] + len(dropped) != source_n:
            raise InvalidData("m + dropped count must equal source_n")
        return cls(units=_owned(arr), dropped=dropped, source_n=int(source_n))

    @property
    def D(self) -> int:
        return self.units.shape[0]

    @property
    def m(self) -> int:
        return self.units.shape[1]


@dataclass(frozen=True)
class Subspace:
    """Orthonormal basis (D×d) with nonincreasing Gram eigenvalues.

    Sign convention: in each column the largest-magnitude entry (smallest
    index on ties) is positive, so bases are reproducible across backends.
    """

    basis: np.ndarray
    eigenvalues: np.ndarray

    @property
    def D(self) -> int:
        return self.basis.shape[0]

    @property
    def d(self) -> int:
        return self.basis.shape[1]


def canonicalize_signs(basis: np.ndarray) -> np.ndarray:
    """Flip columns so the largest-magnitude entry of each is positive."""
    basis = np.array(basis, dtype=np.float64)
    lead = np.argmax(np.abs(basis), axis=0)
    signs = np.sign(basis[lead, np.arange(basis.shape[1])])
    signs[signs == 0] = 1.0
    return basis * signs


def make_subspace(basis: np.ndarray, eigenvalues: np.ndarray) -> Subspace:
    """Canonicalize signs and wrap; orthonormality is the caller's job."""
    basis = canonicalize_signs(basis)
    eigenvalues = np.asarray(eigenvalues, dtype=np.float64)
    if basis.ndim != 2 or eigenvalues.shape != (basis.shape[1],):
        raise InvalidData("basis/eigenvalue shape mismatch")
    if np.any(np.diff(eigenvalues) > 0):
        raise InvalidData("eigenvalues must be nonincreasing")
    return Subspace(basis=_owned(basis), eigenvalues=_owned(eigenvalues))


def center(X: DataMatrix) -> tuple[np.ndarray, DataMatrix]:
    """Subtract the per-feature mean; returns (mean, centered matrix)."""
    mean = X.values.mean(axis=1)
    centered = X.values - mean[:, None]
    return mean, DataMatrix.from_array(centered, mean=mean)


def normalize_columns(Xc: DataMatrix, zero_tol: float = DEFAULT_ZERO_TOL) -> SphereData:
    """Scale each column to unit norm, dropping (near-)zero columns.

    Columns with norm <= zero_tol are recorded in ``dropped`` rather than
    raising: centering can legitimately zero a column.
    """
    norms = np.linalg.norm(Xc.values, axis=0)
    keep = norms > zero_tol
    if not np.any(keep):
        raise EmptyAfterNormalization(
            f"all {Xc.n} columns have norm <= {zero_tol}"
        )
    units = Xc.values[:, keep] / norms[keep]
    dropped = tuple(int(i) for i in np.flatnonzero(~keep))
    return SphereData.from_units(units, dropped=dropped, source_n=Xc.n)


def resolve_strategy(D: int, m: int, d: int, strategy: str = "auto") -> str:
    """Concrete decomposition path for the given shape.

    auto rule: feature side when D <= m, else sample side; overridden to
    the randomized sketch when both sides exceed RANDOMIZED_MIN_SIDE and
    d is at most a tenth of the smaller side.
    """
    if strategy not in STRATEGIES:
        raise InvalidData(f"unknown strategy {strategy!r}")
    if strategy != "auto":
        return strategy
    small = min(D, m)
    if small > RANDOMIZED_MIN_SIDE and d <= small * RANDOMIZED_MAX_RANK_FRACTION:
        return "randomized"
    return "d_path" if D <= m else "n_path"


def _top_eigh(S: np.ndarray, d: int) -> tuple[np.ndarray, np.ndarray]:
    """Top-d eigenpairs of a symmetric matrix, eigenvalues descending."""
    evals, evecs = np.linalg.eigh(S)
    order = np.arange(S.shape[0] - 1, S.shape[0] - 1 - d, -1)
    return evals[order], evecs[:, order]


def dominant_of_matrix(
    M: np.ndarray, d: int, strategy: str = "auto", seed: int = 0
) -> Subspace:
    """Top-d eigenvectors of M·Mᵀ for an arbitrary D×m matrix.

    Shared engine behind :func:`dominant_subspace` (unit columns) and the
    plain-PCA baseline (centered columns).
    """
    M = np.asarray(M, dtype=np.float64)
    D, m = M.shape
    if not 1 <= d <= min(D, m):
        raise InvalidRank(f"d={d} outside [1, min(D={D}, m={m})]")
    strat = resolve_strategy(D, m, d, strategy)
    if strat == "randomized":
        return randomized_of_matrix(
            M, d, oversample=DEFAULT_OVERSAMPLE, power_iters=DEFAULT_POWER_ITERS, seed=seed
        )
    if strat == "d_path":
        evals, evecs = _top_eigh(M @ M.T, d)
        return make_subspace(evecs, evals)
    # Sample side: eigenvectors v of MᵀM map back through M, with
    # ||M v||² = λ, so the back-mapped columns are rescaled by 1/sqrt(λ).
    evals, evecs = _top_eigh(M.T @ M, m)
    usable = evals > RANK_EPS
    if int(usable.sum()) < d:
        raise RankDeficient(
            f"sample-side decomposition found {int(usable.sum())} usable "
            f"directions, need {d}"
        )
    evals = evals[:d]
    mapped = (M @ evecs[:, :d]) / np.sqrt(evals)
    # QR pass guards orthonormality when trailing eigenvalues are small;
    # for well-separated spectra it perturbs columns only at round-off.
    q, _ = np.linalg.qr(mapped)
    return make_subspace(q, evals)


def dominant_subspace(
    U: SphereData, d: int, strategy: str = "auto", seed: int = 0
) -> Subspace:
    """Top-d directions of the unit-column Gram matrix U·Uᵀ."""
    return dominant_of_matrix(U.units, d, strategy=strategy, seed=seed)


def randomized_of_matrix(
    M: np.ndarray,
    d: int,
    oversample: int = DEFAULT_OVERSAMPLE,
    power_iters: int = DEFAULT_POWER_ITERS,
    seed: int = 0,
) -> Subspace:
    """Seeded randomized range finder for the top-d eigenspace of M·Mᵀ.

    Gaussian sketch of width d+oversample, ``power_iters`` multiplications
    by M·Mᵀ with re-orthonormalization after each, then a Rayleigh-Ritz
    solve on the sketched subspace. Deterministic given the seed.
    """
    M = np.asarray(M, dtype=np.float64)
    D, m = M.shape
    width = d + oversample
    if d < 1 or width > min(D, m):
        raise InvalidRank(
            f"sketch width {width} exceeds min(D={D}, m={m})"
        )
    rng = np.random.default_rng(seed)
    Q = np.linalg.qr(rng.standard_normal((D, width)))[0]
    for _ in range(power_iters):
        Q = np.linalg.qr(M @ (M.T @ Q))[0]
    G = M.T @ Q
    evals, W = _top_eigh(G.T @ G, d)
    return make_subspace(Q @ W, evals)


def randomized_range(
    U: SphereData,
    d: int,
    oversample: int = DEFAULT_OVERSAMPLE,
    power_iters: int = DEFAULT_POWER_ITERS,
    seed: int = 0,
) -> Subspace:
    """Randomized top-d eigenspace of U·Uᵀ for unit columns."""
    return randomized_of_matrix(
        U.units, d, oversample=oversample, power_iters=power_iters, seed=seed
    )


def principal_angles(Q1: Subspace, Q2: Subspace) -> np.ndarray:
    """Canonical angles between two equal-rank subspaces, nondecreasing, in
    [0, pi/2]: the arccos of the singular values of Q1ᵀ·Q2.

    Angles below ~1e-7 are unresolvable through arccos alone (cosines
    round to 1), so the small-angle entries are refined through the
    sine-based residual SVD (Knyazev-Argentati combined method), which
    evaluates the same angles to machine precision.
    """
    if Q1.D != Q2.D or Q1.d != Q2.d:
        raise InvalidData(
            f"subspace shapes differ: {Q1.basis.shape} vs {Q2.basis.shape}"
        )
    overlap = Q1.basis.T @ Q2.basis
    cosines = np.clip(np.linalg.svd(overlap, compute_uv=False), 0.0, 1.0)
    angles = np.arccos(cosines)[::-1]  # ascending
    small = angles < np.pi / 4
    if np.any(small):
        residual = Q2.basis - Q1.basis @ overlap
        sines = np.clip(np.linalg.svd(residual, compute_uv=False), 0.0, 1.0)
        fine = np.arcsin(sines)[::-1]  # ascending, pairs with angles
        angles[small] = fine[small]
    return angles


def max_principal_angle(Q1: Subspace, Q2: Subspace) -> float:
    return float(principal_angles(Q1, Q2)[-1])
