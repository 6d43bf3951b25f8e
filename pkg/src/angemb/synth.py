"""Synthetic data with planted outliers, plus recovery/trim-quality metrics.

Inliers live near a low-rank subspace; outliers are large vectors pointing
either into the orthogonal complement (the adversarial case for distance-
based PCA) or uniformly on the sphere. Everything is deterministic given
the spec's seed.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidData, InvalidRank
from .linalg import DataMatrix, Subspace, make_subspace, principal_angles
from .model import TrimReport

DIRECTION_MODES = ("orthogonal", "random")


@dataclass(frozen=True)
class SynthSpec:
    D: int
    n_inliers: int
    true_basis: Subspace
    inlier_noise: float
    outlier_fraction: float
    outlier_magnitude: float
    outlier_direction_mode: str
    seed: int

    @property
    def n_outliers(self) -> int:
        return round(self.outlier_fraction * self.n_inliers)


@dataclass(frozen=True)
class SynthResult:
    data: DataMatrix
    outlier_indices: tuple[int, ...]
    true_basis: Subspace


def random_subspace(D: int, d: int, seed: int = 0) -> Subspace:
    """Seeded random orthonormal basis with nominal unit eigenvalues."""
    if not 1 <= d <= D:
        raise InvalidRank(f"d={d} outside [1, D={D}]")
    rng = np.random.default_rng(seed)
    q = np.linalg.qr(rng.standard_normal((D, d)))[0]
    return make_subspace(q, np.ones(d))


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


def generate(spec: SynthSpec) -> SynthResult:
    """Plant ``n_outliers`` large off-subspace vectors among the inliers.

    Inlier columns: true_basis @ standard-normal coordinates plus
    isotropic noise. Outlier columns: magnitude times a unit direction
    (orthogonal to the subspace, or uniform) plus the same noise.
    Directions come in balanced ± pairs so the planted block is mean-free
    and perturbs the data only directionally, not by a mean shift. The
    column order is shuffled and the planted positions recorded.
    """
    if spec.outlier_direction_mode not in DIRECTION_MODES:
        raise InvalidData(
            f"unknown outlier_direction_mode {spec.outlier_direction_mode!r}"
        )
    if not 0.0 <= spec.outlier_fraction < 1.0:
        raise InvalidData("outlier_fraction must be in [0, 1)")
    if spec.outlier_magnitude < 0.0:
        raise InvalidData("outlier_magnitude must be >= 0")
    d_true = spec.true_basis.d
    if spec.true_basis.D != spec.D or d_true >= spec.D:
        raise InvalidRank(
            f"true basis {spec.true_basis.basis.shape} incompatible with D={spec.D}"
        )
    rng = np.random.default_rng(spec.seed)
    basis = spec.true_basis.basis

    coords = rng.standard_normal((d_true, spec.n_inliers))
    inliers = basis @ coords
    inliers += spec.inlier_noise * rng.standard_normal((spec.D, spec.n_inliers))

    n_out = spec.n_outliers
    directions = np.empty((spec.D, n_out))
    for k in range(0, n_out, 2):
        g = rng.standard_normal(spec.D)
        if spec.outlier_direction_mode == "orthogonal":
            g = g - basis @ (basis.T @ g)
        directions[:, k] = _unit(g)
        if k + 1 < n_out:
            directions[:, k + 1] = -directions[:, k]
    outliers = spec.outlier_magnitude * directions
    outliers += spec.inlier_noise * rng.standard_normal((spec.D, n_out))

    stacked = np.concatenate([inliers, outliers], axis=1)
    order = rng.permutation(spec.n_inliers + n_out)
    shuffled = stacked[:, order]
    planted = tuple(int(i) for i in np.flatnonzero(order >= spec.n_inliers))
    return SynthResult(
        data=DataMatrix.from_array(shuffled),
        outlier_indices=planted,
        true_basis=spec.true_basis,
    )


def subspace_recovery_error(Q: Subspace, Q_true: Subspace) -> float:
    """Largest principal angle between fitted and true subspaces, radians."""
    return float(principal_angles(Q, Q_true)[-1])


def trim_metrics(report: TrimReport, truth) -> dict:
    """Precision/recall of the trim's outlier set against planted truth.

    An empty prediction has precision 1 when the truth is also empty and
    0 otherwise; an empty truth yields recall 1 (nothing to find).
    """
    predicted = set(report.outliers)
    truth = set(int(i) for i in truth)
    hits = len(predicted & truth)
    if predicted:
        precision = hits / len(predicted)
    else:
        precision = 1.0 if not truth else 0.0
    recall = hits / len(truth) if truth else 1.0
    return {"precision": precision, "recall": recall}


# --- fixed study presets -------------------------------------------------

# Canonical robustness preset: one dominant direction in 10-D, 10%
# orthogonal outliers at 10x magnitude. The noise level is small enough
# that inlier directions stay well inside the pi/3 trim cone.
CANONICAL_SEED = 42
CANONICAL_NOISE = 0.001


def canonical_spec(outlier_fraction: float = 0.1) -> SynthSpec:
    return SynthSpec(
        D=10,
        n_inliers=500,
        true_basis=random_subspace(10, 1, seed=CANONICAL_SEED),
        inlier_noise=CANONICAL_NOISE,
        outlier_fraction=outlier_fraction,
        outlier_magnitude=10.0,
        outlier_direction_mode="orthogonal",
        seed=CANONICAL_SEED,
    )


def four_class_3d(
    n_per_class: int = 50,
    outlier_fraction: float = 0.1,
    outlier_magnitude: float = 6.0,
    seed: int = 0,
) -> tuple[SynthResult, np.ndarray]:
    """Four clusters in 3-D around the xy-plane, with +z shifted outliers.

    Fixed geometry (a stand-in study set, nothing measured): class k has
    its center at radius 3 along the in-plane angle k·90°, cluster spread
    0.3. A fraction of samples per class is shifted out of plane by
    ``outlier_magnitude``. Returns the shuffled result plus class labels
    aligned with the data columns.
    """
    rng = np.random.default_rng(seed)
    centers = 3.0 * np.array(
        [[1, 0, 0], [0, 1, 0], [-1, 0, 0], [0, -1, 0]], dtype=float
    ).T
    cols, labels = [], []
    for k in range(4):
        pts = centers[:, [k]] + 0.3 * rng.standard_normal((3, n_per_class))
        cols.append(pts)
        labels.extend([k] * n_per_class)
    data = np.concatenate(cols, axis=1)
    labels = np.array(labels)
    n = data.shape[1]
    n_shift = round(outlier_fraction * n)
    shifted = rng.choice(n, size=n_shift, replace=False)
    data[2, shifted] += outlier_magnitude
    order = rng.permutation(n)
    data = data[:, order]
    labels = labels[order]
    planted = tuple(int(i) for i in np.flatnonzero(np.isin(order, shifted)))
    plane = make_subspace(np.eye(3)[:, :2], np.ones(2))
    result = SynthResult(
        data=DataMatrix.from_array(data),
        outlier_indices=planted,
        true_basis=plane,
    )
    return result, labels


def moving_square_video(
    width: int = 64,
    height: int = 48,
    n_frames: int = 100,
    n_intruded: int = 20,
    square: int = 10,
    noise_sigma: float = 1.0,
    seed: int = 7,
):
    """Static-gradient scene with illumination flicker and a moving intruder.

    Every frame is gain_i * gradient + pixel noise; ``n_intruded`` frames
    additionally contain a bright ``square``×``square`` patch that moves
    across the darker half of the scene. Gains stay bounded away from the
    mean so clean frames share one strong direction after centering.

    Returns (frames D×n, clean D×n ground-truth backgrounds,
    intruded frame indices, (width, height)).
    """
    rng = np.random.default_rng(seed)
    D = width * height
    col_ramp = np.linspace(40.0, 200.0, width)
    scene = np.tile(col_ramp, (height, 1)).reshape(D)

    gains = 1.0 + rng.choice([-1.0, 1.0], size=n_frames) * rng.uniform(
        0.03, 0.06, size=n_frames
    )
    clean = scene[:, None] * gains[None, :]
    frames = clean + noise_sigma * rng.standard_normal((D, n_frames))

    intruded = np.sort(rng.choice(n_frames, size=n_intruded, replace=False))
    max_row = height - square
    max_col = width // 2 - square  # keep the intruder over the dark half
    for k, idx in enumerate(intruded):
        r = (k * max_row) // max(n_intruded - 1, 1)
        c = (k * max_col) // max(n_intruded - 1, 1)
        patch = np.zeros((height, width))
        patch[r : r + square, c : c + square] = 255.0
        flat = patch.reshape(D)
        col = frames[:, idx]
        frames[:, idx] = np.where(flat > 0, flat, col)

    frames = np.clip(frames, 0.0, 255.0)
    return frames, clean, tuple(int(i) for i in intruded), (width, height)
