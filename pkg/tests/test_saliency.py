import numpy as np
import pytest

from salface.errors import ConfigError, DecodeError
from salface.imagekit import Image, resize_bilinear, save_pnm
from salface.saliency import (
    center_surround,
    frequency_tuned,
    gaussian_blur,
    load_external_map,
    map_to_image,
    normalize,
)

from conftest import gray_image, random_image
from oracles import frequency_tuned_raw, gaussian_blur_plane, minmax


class TestNormalize:
    def test_two_values(self):
        np.testing.assert_allclose(normalize(np.array([[0.2, 0.7]])), [[0.0, 1.0]])

    def test_constant_becomes_zero(self):
        np.testing.assert_array_equal(normalize(np.full((3, 3), 0.5)), np.zeros((3, 3)))

    def test_idempotent(self, rng):
        m = rng.random((6, 6))
        once = normalize(m)
        np.testing.assert_array_equal(normalize(once), once)

    def test_order_preserving(self, rng):
        m = rng.random((5, 5))
        np.testing.assert_array_equal(
            np.argsort(m, axis=None), np.argsort(normalize(m), axis=None)
        )


class TestGaussianBlur:
    def test_matches_direct_oracle(self, rng):
        plane = rng.random((7, 6))
        np.testing.assert_allclose(gaussian_blur(plane), gaussian_blur_plane(plane),
                                   atol=1e-12)

    def test_preserves_constants(self):
        np.testing.assert_allclose(gaussian_blur(np.full((5, 5), 0.3)), 0.3, atol=1e-12)


class TestFrequencyTuned:
    def test_constant_image_all_zero(self):
        img = Image(np.full((3, 6, 6), 0.7))
        np.testing.assert_array_equal(frequency_tuned(img), np.zeros((6, 6)))

    def test_half_and_half_symmetric_max_at_outer_columns(self):
        plane = np.zeros((8, 8))
        plane[:, 4:] = 1.0
        sal = frequency_tuned(gray_image(plane))
        np.testing.assert_allclose(sal, sal[:, ::-1], atol=1e-12)
        cols = sal.mean(axis=0)
        assert cols[0] == pytest.approx(cols.max(), abs=1e-9)
        assert cols[7] == pytest.approx(cols.max(), abs=1e-9)
        assert cols.max() > 2 * cols[3]

    def test_matches_straight_loop_oracle(self, rng):
        for _ in range(5):
            img = random_image(rng, channels=3, h=8, w=8)
            expected = minmax(frequency_tuned_raw(img.data))
            np.testing.assert_allclose(frequency_tuned(img), expected, atol=1e-6)

    def test_shift_invariance_before_scale(self, rng):
        base = 0.5 * rng.random((3, 8, 8))
        img = Image(base)
        shifted = Image(base + 0.3)
        np.testing.assert_allclose(frequency_tuned(img), frequency_tuned(shifted),
                                   atol=1e-6)

    def test_output_dims(self, rng):
        img = random_image(rng, h=5, w=9)
        assert frequency_tuned(img).shape == (5, 9)


class TestCenterSurround:
    def test_constant_image_all_zero(self):
        img = Image(np.full((3, 16, 16), 0.4))
        np.testing.assert_array_equal(center_surround(img, 2), np.zeros((16, 16)))

    def test_bright_pixel_peak_near_source(self):
        plane = np.full((16, 16), 0.2)
        plane[5, 11] = 1.0
        sal = center_surround(gray_image(plane), 2)
        peak = np.unravel_index(np.argmax(sal), sal.shape)
        assert abs(peak[0] - 5) <= 1 and abs(peak[1] - 11) <= 1

    def test_output_dims_match_input(self, rng):
        img = random_image(rng, h=20, w=24)
        assert center_surround(img, 3).shape == (20, 24)

    def test_range(self, rng):
        sal = center_surround(random_image(rng, h=32, w=32), 4)
        assert sal.min() >= 0.0 and sal.max() <= 1.0

    def test_too_small_image_rejected(self, rng):
        with pytest.raises(ConfigError, match="too small"):
            center_surround(random_image(rng, h=8, w=8), 4)

    def test_levels_validation(self, rng):
        img = random_image(rng, h=32, w=32)
        for bad in (1, 6):
            with pytest.raises(ConfigError):
                center_surround(img, bad)


class TestExternalMap:
    def test_matching_dims_normalized_passthrough(self):
        levels = np.array([[0, 255], [128, 64]], dtype=np.uint8)
        data = b"P5\n2 2\n255\n" + levels.tobytes()
        sal = load_external_map(data, 2, 2)
        np.testing.assert_allclose(sal, levels / 255.0, atol=1e-12)

    def test_constant_map_zeros(self):
        data = b"P5\n2 2\n255\n" + bytes([80] * 4)
        np.testing.assert_array_equal(load_external_map(data, 2, 2), np.zeros((2, 2)))

    def test_resize_then_normalize_composition(self):
        levels = np.array([[0, 255], [255, 0]], dtype=np.uint8)
        data = b"P5\n2 2\n255\n" + levels.tobytes()
        sal = load_external_map(data, 3, 3)
        expected = minmax(
            resize_bilinear(Image((levels / 255.0)[None]), 3, 3).plane(0)
        )
        np.testing.assert_allclose(sal, expected, atol=1e-12)

    def test_color_map_rejected(self):
        with pytest.raises(DecodeError, match="P5"):
            load_external_map(b"P6\n1 1\n255\n\x00\x00\x00", 1, 1)

    def test_decode_error_propagates(self):
        with pytest.raises(DecodeError):
            load_external_map(b"P5\n2 2\n255\n\x00", 2, 2)


def test_map_round_trip_through_pgm(rng):
    sal = normalize(rng.random((5, 4)))
    img = map_to_image(sal)
    data = save_pnm(img)
    assert data.startswith(b"P5")
