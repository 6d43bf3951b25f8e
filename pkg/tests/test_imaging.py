"""PGM ingestion/emission and the imaging pipelines."""

import math

import numpy as np
import pytest

from angemb.errors import EmptyInput, MixedDimensions, UnsupportedFormat
from angemb.imaging import (
    FrameStack,
    background_model,
    load_frames,
    quantize,
    shadow_removal,
    stack_from_matrix,
    write_frames,
)
from angemb.synth import moving_square_video


def write_pgm(path, pixels, maxval=255):
    pixels = np.asarray(pixels, dtype=np.uint8)
    h, w = pixels.shape
    path.write_bytes(f"P5\n{w} {h}\n{maxval}\n".encode() + pixels.tobytes())


class TestLoadFrames:
    def test_column_layout_is_row_major(self, tmp_path):
        write_pgm(tmp_path / "a.pgm", np.array([[0, 255], [0, 255]]))
        write_pgm(tmp_path / "b.pgm", np.array([[255, 0], [255, 0]]))
        stack = load_frames([tmp_path / "a.pgm", tmp_path / "b.pgm"])
        assert (stack.width, stack.height) == (2, 2)
        np.testing.assert_array_equal(stack.frames.values[:, 0], [0, 255, 0, 255])
        np.testing.assert_array_equal(stack.frames.values[:, 1], [255, 0, 255, 0])

    def test_single_frame(self, tmp_path):
        write_pgm(tmp_path / "one.pgm", np.zeros((3, 4)))
        stack = load_frames([tmp_path / "one.pgm"])
        assert stack.n == 1 and stack.frames.D == 12

    def test_frames_sorted_by_name(self, tmp_path):
        write_pgm(tmp_path / "z.pgm", np.full((2, 2), 7))
        write_pgm(tmp_path / "a.pgm", np.full((2, 2), 3))
        stack = load_frames([tmp_path / "z.pgm", tmp_path / "a.pgm"])
        assert stack.names == ("a.pgm", "z.pgm")
        assert stack.frames.values[0, 0] == 3

    def test_comments_and_whitespace_tolerated(self, tmp_path):
        raw = b"P5 # magic\n# a comment line\n 2\t2 # dims\n255\n" + bytes(
            [1, 2, 3, 4]
        )
        (tmp_path / "c.pgm").write_bytes(raw)
        stack = load_frames([tmp_path / "c.pgm"])
        np.testing.assert_array_equal(stack.frames.values[:, 0], [1, 2, 3, 4])

    def test_color_rejected(self, tmp_path):
        (tmp_path / "c.ppm").write_bytes(b"P6\n1 1\n255\n" + bytes(3))
        with pytest.raises(UnsupportedFormat, match="P5"):
            load_frames([tmp_path / "c.ppm"])

    def test_ascii_rejected(self, tmp_path):
        (tmp_path / "a.pgm").write_bytes(b"P2\n1 1\n255\n0\n")
        with pytest.raises(UnsupportedFormat):
            load_frames([tmp_path / "a.pgm"])

    def test_sixteen_bit_rejected(self, tmp_path):
        (tmp_path / "w.pgm").write_bytes(b"P5\n1 1\n65535\n" + bytes(2))
        with pytest.raises(UnsupportedFormat, match="8-bit"):
            load_frames([tmp_path / "w.pgm"])

    def test_truncated_raster_rejected(self, tmp_path):
        (tmp_path / "t.pgm").write_bytes(b"P5\n2 2\n255\n" + bytes(3))
        with pytest.raises(UnsupportedFormat, match="pixel bytes"):
            load_frames([tmp_path / "t.pgm"])

    def test_mixed_dimensions_rejected(self, tmp_path):
        write_pgm(tmp_path / "a.pgm", np.zeros((2, 2)))
        write_pgm(tmp_path / "b.pgm", np.zeros((3, 2)))
        with pytest.raises(MixedDimensions):
            load_frames(sorted(tmp_path.glob("*.pgm")))

    def test_empty_input_rejected(self):
        with pytest.raises(EmptyInput):
            load_frames([])

    def test_face_archive_scale_layout(self, tmp_path):
        # 192x168 frames, 64 of them: D = 32256, n = 64
        rng = np.random.default_rng(0)
        vals = rng.integers(0, 256, size=(192 * 168, 64)).astype(float)
        stack = stack_from_matrix(vals, width=168, height=192)
        paths = write_frames(stack, tmp_path)
        loaded = load_frames(paths)
        assert loaded.frames.D == 32256 and loaded.n == 64
        np.testing.assert_array_equal(loaded.frames.values, vals)


class TestWriteFrames:
    def test_round_trip_identity_on_integer_stack(self, tmp_path):
        rng = np.random.default_rng(4)
        vals = rng.integers(0, 256, size=(20, 5)).astype(float)
        stack = stack_from_matrix(vals, width=5, height=4)
        paths = write_frames(stack, tmp_path)
        assert [p.name for p in paths] == list(stack.names)
        loaded = load_frames(paths)
        np.testing.assert_array_equal(loaded.frames.values, vals)

    def test_rounding_half_up_and_clamping(self):
        np.testing.assert_array_equal(
            quantize(np.array([0.5, 255.4, -3.0, 256.9, 127.49])),
            [1, 255, 0, 255, 127],
        )

    def test_suffix_applied(self, tmp_path):
        stack = stack_from_matrix(np.zeros((4, 2)), width=2, height=2)
        paths = write_frames(stack, tmp_path, suffix="_bg")
        assert all(p.name.endswith("_bg.pgm") for p in paths)


def gradient_stack(n=12, width=8, height=6, seed=0):
    rng = np.random.default_rng(seed)
    ramp = np.tile(np.linspace(30, 220, width), height)
    gains = 1.0 + 0.05 * rng.standard_normal(n)
    vals = np.clip(ramp[:, None] * gains[None, :], 0, 255)
    return stack_from_matrix(vals, width=width, height=height)


class TestBackgroundModel:
    def test_static_sequence_reproduced_exactly(self):
        vals = np.tile(np.arange(24, dtype=float)[:, None] * 10 % 251, (1, 6))
        stack = stack_from_matrix(vals, width=6, height=4)
        result = background_model(stack, d=1, method="pca")
        np.testing.assert_allclose(result.backgrounds.frames.values, vals, atol=1e-9)
        np.testing.assert_allclose(result.foreground.frames.values, 0.0, atol=1e-9)

    def test_background_plus_residual_matches_input_preclamp(self):
        stack = gradient_stack()
        result = background_model(stack, d=2, method="ae")
        residual = stack.frames.values - result.raw_reconstruction
        np.testing.assert_allclose(
            result.raw_reconstruction + residual, stack.frames.values, atol=1e-9
        )

    def test_trimmed_video_beats_pca_on_clean_background(self):
        frames, clean, intruded, (w, h) = moving_square_video()
        stack = stack_from_matrix(frames, w, h)
        tae = background_model(stack, d=5, method="tae", eta_theta=math.pi / 3)
        pca = background_model(stack, d=5, method="pca")
        rmse = lambda r: float(np.sqrt(np.mean((r.raw_reconstruction - clean) ** 2)))
        assert rmse(tae) < rmse(pca)
        predicted = set(tae.model.trim.outliers)
        truth = set(intruded)
        jaccard = len(predicted & truth) / len(predicted | truth)
        assert jaccard >= 0.8

    def test_trim_count_monotone_over_threshold_range(self):
        frames, _, _, (w, h) = moving_square_video()
        stack = stack_from_matrix(frames, w, h)
        counts = [
            background_model(stack, d=5, method="tae", eta_theta=eta).model.trim.tau_min
            for eta in (math.pi / 3, 0.38 * math.pi, 7 * math.pi / 18)
        ]
        assert counts[0] >= counts[1] >= counts[2]

    def test_method_swap_preserves_shapes_and_ranges(self):
        stack = gradient_stack()
        for method in ("pca", "em_pca", "ae", "tae"):
            result = background_model(stack, d=2, method=method)
            for out in (result.backgrounds, result.foreground):
                assert out.frames.values.shape == stack.frames.values.shape
                assert out.frames.values.min() >= 0.0
                assert out.frames.values.max() <= 255.0


class TestShadowRemoval:
    def test_low_rank_faces_reconstruct_to_flat_difference(self):
        rng = np.random.default_rng(3)
        base = 120.0 + 40.0 * np.sin(np.linspace(0, 6, 48))
        modes = rng.standard_normal((48, 8))
        coeffs = rng.standard_normal((8, 30))
        vals = np.clip(base[:, None] + modes @ coeffs, 0, 255)
        stack = stack_from_matrix(vals, width=8, height=6)
        result = shadow_removal(stack, d=9, method="ae")
        assert np.all(result.inverted_difference.frames.values >= 254.0)
        np.testing.assert_array_equal(
            quantize(result.inverted_difference.frames.values),
            np.full_like(vals, 255, dtype=np.uint8),
        )

    def test_planted_dark_band_shows_in_difference(self):
        rng = np.random.default_rng(9)
        base = np.tile(np.linspace(80, 200, 10), 8)
        modes = rng.standard_normal((80, 3))
        vals = np.clip(
            base[:, None] + modes @ rng.standard_normal((3, 25)), 20, 255
        )
        band = slice(30, 50)  # rows 3-4 of the 10-wide raster
        vals[band, 0] = 5.0  # heavy cast shadow on the first face
        stack = stack_from_matrix(vals, width=10, height=8)
        result = shadow_removal(stack, d=3, method="tae", eta_theta=math.pi / 3)
        diff = result.inverted_difference.frames.values[:, 0]
        outside = np.ones(80, dtype=bool)
        outside[band] = False
        assert diff[band].mean() < diff[outside].mean()

    def test_default_component_counts(self):
        from angemb.imaging import BACKGROUND_COMPONENTS, FACE_COMPONENTS

        assert BACKGROUND_COMPONENTS == 5
        assert FACE_COMPONENTS == 9
        stack = gradient_stack(n=12)
        assert shadow_removal(stack, method="pca").model.d == 9
        assert background_model(stack, method="pca").model.d == 5
