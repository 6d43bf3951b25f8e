"""Synthetic generators and the recovery/trim metrics."""

import dataclasses
import math

import numpy as np
import pytest

from angemb.ae import fit_ae
from angemb.baselines import fit_pca
from angemb.errors import InvalidData, InvalidRank
from angemb.model import TrimReport
from angemb.synth import (
    SynthSpec,
    canonical_spec,
    four_class_3d,
    generate,
    moving_square_video,
    random_subspace,
    subspace_recovery_error,
    trim_metrics,
)
from angemb.tae import fit_tae
from conftest import as_subspace


def plain_spec(**overrides) -> SynthSpec:
    base = dict(
        D=6,
        n_inliers=200,
        true_basis=random_subspace(6, 2, seed=1),
        inlier_noise=0.05,
        outlier_fraction=0.1,
        outlier_magnitude=8.0,
        outlier_direction_mode="orthogonal",
        seed=3,
    )
    base.update(overrides)
    return SynthSpec(**base)


def report_with(outliers, m) -> TrimReport:
    inliers = tuple(i for i in range(m) if i not in set(outliers))
    return TrimReport(
        eta_theta=math.pi / 3,
        cos_threshold=0.5,
        tau=None,
        tau_min=len(outliers),
        pivot=0,
        outliers=tuple(outliers),
        inliers=inliers,
    )


class TestGenerate:
    def test_fraction_zero_recovers_cleanly(self):
        spec = plain_spec(
            n_inliers=1000, outlier_fraction=0.0, inlier_noise=0.05
        )
        result = generate(spec)
        assert result.outlier_indices == ()
        for model in (fit_pca(result.data, 2), fit_ae(result.data, 2)):
            err = subspace_recovery_error(model.subspace, result.true_basis)
            assert np.degrees(err) < 2.0

    def test_zero_magnitude_still_deterministic(self):
        spec = plain_spec(outlier_magnitude=0.0)
        a, b = generate(spec), generate(spec)
        assert np.array_equal(a.data.values, b.data.values)
        assert a.outlier_indices == b.outlier_indices

    def test_identical_specs_bitwise_identical(self):
        a, b = generate(plain_spec()), generate(plain_spec())
        assert np.array_equal(a.data.values, b.data.values)
        assert a.outlier_indices == b.outlier_indices

    def test_different_seeds_differ(self):
        a = generate(plain_spec(seed=1))
        b = generate(plain_spec(seed=2))
        assert not np.array_equal(a.data.values, b.data.values)

    def test_planted_count_rounds_from_fraction(self):
        assert len(generate(plain_spec(outlier_fraction=0.1)).outlier_indices) == 20
        assert len(generate(plain_spec(outlier_fraction=0.052)).outlier_indices) == 10

    def test_orthogonal_mode_directions_leave_subspace(self):
        spec = plain_spec(inlier_noise=0.0)
        result = generate(spec)
        basis = result.true_basis.basis
        out = result.data.values[:, list(result.outlier_indices)]
        in_plane = basis @ (basis.T @ out)
        np.testing.assert_allclose(np.linalg.norm(in_plane, axis=0), 0.0, atol=1e-9)

    def test_full_rank_basis_rejected(self):
        with pytest.raises(InvalidRank):
            generate(plain_spec(true_basis=random_subspace(6, 6, seed=0)))

    def test_bad_mode_rejected(self):
        with pytest.raises(InvalidData):
            generate(plain_spec(outlier_direction_mode="sideways"))


class TestRecoveryError:
    def test_identical(self):
        Q = random_subspace(7, 3, seed=5)
        assert subspace_recovery_error(Q, Q) == pytest.approx(0.0, abs=1e-10)

    def test_orthogonal_spans(self):
        e12 = as_subspace(np.eye(4)[:, :2])
        e34 = as_subspace(np.eye(4)[:, 2:])
        assert subspace_recovery_error(e12, e34) == pytest.approx(math.pi / 2)

    def test_rotated_plane_by_known_angle(self):
        theta = 0.4
        plane = np.eye(4)[:, :2]
        rotated = plane.copy()
        rotated[:, 1] = [0.0, math.cos(theta), math.sin(theta), 0.0]
        err = subspace_recovery_error(as_subspace(plane), as_subspace(rotated))
        assert err == pytest.approx(theta, abs=1e-9)

    def test_dimension_mismatch(self):
        with pytest.raises(InvalidData):
            subspace_recovery_error(
                as_subspace(np.eye(4)[:, :2]), as_subspace(np.eye(4)[:, :3])
            )


class TestTrimMetrics:
    def test_exact_match(self):
        metrics = trim_metrics(report_with((1, 4), 6), [1, 4])
        assert metrics == {"precision": 1.0, "recall": 1.0}

    def test_empty_prediction_nonempty_truth(self):
        metrics = trim_metrics(report_with((), 6), [2])
        assert metrics["recall"] == 0.0
        assert metrics["precision"] == 0.0

    def test_empty_prediction_empty_truth(self):
        metrics = trim_metrics(report_with((), 6), [])
        assert metrics == {"precision": 1.0, "recall": 1.0}

    def test_partial_overlap(self):
        metrics = trim_metrics(report_with((0, 1, 2, 3), 8), [2, 3, 4, 5])
        assert metrics == {"precision": 0.5, "recall": 0.5}

    def test_canonical_preset_regression(self):
        result = generate(canonical_spec())
        model = fit_tae(result.data, 1, math.pi / 3)
        metrics = trim_metrics(model.trim, result.outlier_indices)
        assert metrics == {"precision": 1.0, "recall": 1.0}


class TestCanonicalPreset:
    def test_shape_and_count(self):
        result = generate(canonical_spec())
        assert result.data.D == 10
        assert result.data.n == 550
        assert len(result.outlier_indices) == 50

    def test_fraction_zero_variant_barely_trims(self):
        result = generate(canonical_spec(outlier_fraction=0.0))
        model_ae = fit_ae(result.data, 1)
        err = subspace_recovery_error(model_ae.subspace, result.true_basis)
        assert np.degrees(err) < 2.0
        model_tae = fit_tae(result.data, 1, math.pi / 3)
        assert model_tae.trim.tau_min < 0.01 * result.data.n


class TestFourClass3D:
    def test_shape_labels_and_plane(self):
        result, labels = four_class_3d(seed=2)
        assert result.data.D == 3
        assert result.data.n == 200
        assert sorted(set(labels)) == [0, 1, 2, 3]
        assert len(labels) == result.data.n
        np.testing.assert_allclose(
            result.true_basis.basis, np.eye(3)[:, :2], atol=1e-12
        )
        assert len(result.outlier_indices) == 20

    def test_shifted_samples_sit_off_plane(self):
        result, _ = four_class_3d(seed=2)
        z = result.data.values[2]
        planted = list(result.outlier_indices)
        clean = [i for i in range(result.data.n) if i not in set(planted)]
        assert z[planted].min() > np.abs(z[clean]).max()


class TestMovingSquareVideo:
    def test_deterministic_and_shaped(self):
        f1, c1, idx1, (w, h) = moving_square_video()
        f2, c2, idx2, _ = moving_square_video()
        assert f1.shape == (w * h, 100) and c1.shape == f1.shape
        assert np.array_equal(f1, f2) and idx1 == idx2
        assert len(idx1) == 20
        assert f1.min() >= 0.0 and f1.max() <= 255.0

    def test_intruded_frames_carry_bright_patch(self):
        frames, clean, intruded, _ = moving_square_video()
        residual = np.abs(frames - clean).max(axis=0)
        assert residual[list(intruded)].min() > 100.0
