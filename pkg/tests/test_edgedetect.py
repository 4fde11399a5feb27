"""Edge detection tests, checked against the nested-loop convolution oracle."""

import numpy as np
import pytest

from coastedge.edgedetect import (
    KERNELS,
    PREWITT,
    SCHARR,
    SOBEL,
    CannyParams,
    canny,
    canny_debug,
    convolve2d,
    detect,
    gradient_field,
    magnitude_to_edgemap,
)
from coastedge.errors import KernelTooLarge, ParamError
from coastedge.raster import Band, BandName

from oracles import convolve2d_loops


def band_of(values):
    return Band(BandName.GREEN, np.asarray(values, dtype=np.float64), "scaled8")


def step_band(size=16, value=255.0):
    samples = np.zeros((size, size))
    samples[:, size // 2 :] = value
    return band_of(samples)


class TestConvolve2d:
    def test_identity_kernel(self, rng):
        image = rng.integers(0, 256, size=(8, 8)).astype(float)
        np.testing.assert_array_equal(convolve2d(image, np.array([[1.0]])), image)

    def test_matches_loop_oracle(self, rng):
        for _ in range(20):
            image = rng.normal(size=(8, 8)) * 100
            image -= image.min()
            kernel = rng.normal(size=(3, 3))
            np.testing.assert_allclose(
                convolve2d(image, kernel), convolve2d_loops(image, kernel), atol=1e-9
            )

    def test_constant_with_zero_sum_kernel(self):
        out = convolve2d(np.full((6, 6), 37.0), SOBEL.gx)
        np.testing.assert_allclose(out, 0.0, atol=1e-12)

    def test_kernel_too_large(self):
        with pytest.raises(KernelTooLarge):
            convolve2d(np.zeros((3, 3)), np.zeros((5, 5)))

    def test_even_kernel_rejected(self):
        with pytest.raises(ParamError):
            convolve2d(np.zeros((6, 6)), np.zeros((2, 2)))


class TestKernels:
    def test_gy_is_transpose_and_zero_sum(self):
        for pair in (SOBEL, SCHARR, PREWITT):
            np.testing.assert_array_equal(pair.gy, pair.gx.T)
            assert pair.gx.sum() == 0
            assert pair.gy.sum() == 0

    def test_stated_sobel_rows(self):
        np.testing.assert_array_equal(SOBEL.gx, [[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]])
        np.testing.assert_array_equal(SCHARR.gx, [[-3, 0, 3], [-10, 0, 10], [-3, 0, 3]])
        np.testing.assert_array_equal(PREWITT.gx, [[-1, 0, 1], [-1, 0, 1], [-1, 0, 1]])


class TestGradientField:
    def test_vertical_step_peak(self):
        band = step_band(16)
        field = gradient_field(band, SOBEL)
        # peak on the two columns adjacent to the step, value 4*255, direction 0
        for col in (7, 8):
            np.testing.assert_allclose(field.magnitude[5, col], 4 * 255.0)
            np.testing.assert_allclose(field.direction[5, col], 0.0, atol=1e-12)
        np.testing.assert_allclose(field.magnitude[:, :6], 0.0, atol=1e-9)

    def test_constant_zero_magnitude(self):
        field = gradient_field(band_of(np.full((8, 8), 120.0)), SCHARR)
        np.testing.assert_allclose(field.magnitude, 0.0, atol=1e-9)

    def test_diagonal_step_direction(self):
        size = 16
        rows, cols = np.mgrid[0:size, 0:size]
        samples = np.where(cols - rows > 0, 255.0, 0.0)
        field = gradient_field(band_of(samples), SOBEL)
        edge = np.abs(cols - rows) <= 1
        interior = edge & (rows > 1) & (rows < size - 2) & (cols > 1) & (cols < size - 2)
        np.testing.assert_allclose(
            np.abs(field.direction[interior]), np.pi / 4, atol=1e-9
        )

    def test_rotation_consistency(self, rng):
        image = rng.integers(0, 256, size=(10, 10)).astype(float)
        band = band_of(image)
        rotated = band_of(np.rot90(image).copy())
        mag = gradient_field(band, SOBEL).magnitude
        mag_rot = gradient_field(rotated, SOBEL).magnitude
        np.testing.assert_allclose(mag_rot, np.rot90(mag), atol=1e-9)

    def test_ramp_response_ratios(self):
        # all three gx kernels respond per unit slope with their total weight
        ramp = np.tile(np.arange(16, dtype=float), (16, 1))
        band = band_of(ramp)
        responses = {
            name: gradient_field(band, pair).magnitude[8, 8]
            for name, pair in KERNELS.items()
        }
        np.testing.assert_allclose(responses["sobel"], 8.0)
        np.testing.assert_allclose(responses["scharr"], 32.0)
        np.testing.assert_allclose(responses["prewitt"], 6.0)


class TestMagnitudeToEdgemap:
    def test_zero_field(self):
        band = band_of(np.full((8, 8), 9.0))
        edge = magnitude_to_edgemap(gradient_field(band, SOBEL))
        assert (edge.values == 0).all()
        assert edge.kind == "magnitude"

    def test_unique_max_maps_to_255(self, rng):
        image = rng.integers(0, 200, size=(10, 10)).astype(float)
        image[4, 4] = 30000.0  # dominant spike
        field = gradient_field(band_of(image), SOBEL)
        edge = magnitude_to_edgemap(field)
        assert edge.values.max() == 255
        assert edge.values[np.unravel_index(field.magnitude.argmax(), image.shape)] == 255


class TestCanny:
    def test_constant_is_empty(self):
        edge = canny(band_of(np.full((16, 16), 77.0)))
        assert (edge.values == 0).all()
        assert edge.kind == "binary"

    def test_clean_vertical_step_thin_line(self):
        edge = canny(step_band(32), CannyParams())
        cols = np.nonzero(edge.values.any(axis=0))[0]
        # NMS thins the response to the ridge straddling the step
        assert len(cols) in (1, 2)
        assert set(cols) <= {15, 16}
        assert (edge.values[:, cols] == 255).all()

    def test_binary_mask_edges_touch_opposite_class(self, noisy_scene):
        label = noisy_scene.label
        band = Band(BandName.BLUE, label.values.astype(float) * 255.0, "scaled8")
        edge = canny(band, CannyParams(smoothing=False))
        padded = np.pad(label.values, 1, mode="edge")
        for r, c in zip(*np.nonzero(edge.values)):
            window = padded[r : r + 3, c : c + 3]
            assert (window != label.values[r, c]).any()

    def test_structural_invariants(self, noisy_scene):
        from coastedge.preprocess import PreprocessSpec, run_pipeline

        params = CannyParams()
        band = run_pipeline(noisy_scene.bands[BandName.NIR], PreprocessSpec())
        edge, debug = canny_debug(band, params)
        on = edge.values == 255
        assert np.isin(edge.values, (0, 255)).all()
        # every edge pixel reaches the low threshold
        assert (debug["normalized_magnitude"][on] >= params.low_threshold).all()
        # weak pixels must be 8-connected to a strong pixel through edge pixels
        from scipy import ndimage

        labels, count = ndimage.label(on, structure=np.ones((3, 3)))
        strong_labels = set(np.unique(labels[debug["strong"]]))
        for lbl in range(1, count + 1):
            assert lbl in strong_labels

    def test_param_validation(self):
        with pytest.raises(ParamError):
            CannyParams(low_threshold=0)
        with pytest.raises(ParamError):
            CannyParams(low_threshold=200, high_threshold=100)
        with pytest.raises(ParamError):
            CannyParams(high_threshold=300)


class TestDetect:
    def test_sobel_dispatch_equals_manual(self, rng):
        band = band_of(rng.integers(0, 256, size=(12, 12)))
        manual = magnitude_to_edgemap(gradient_field(band, SOBEL))
        np.testing.assert_array_equal(detect(band, "sobel").values, manual.values)

    def test_kinds(self):
        band = step_band(16)
        assert detect(band, "canny").kind == "binary"
        assert detect(band, "prewitt").kind == "magnitude"

    def test_unknown_algorithm(self):
        with pytest.raises(ParamError):
            detect(step_band(16), "laplacian")
