import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from salface.errors import DecodeError, ShapeError
from salface.facecrop import BBox
from salface.imagekit import (
    Image,
    crop_with_edge_pad,
    flip_horizontal,
    load_pnm,
    resize_bilinear,
    rotate,
    save_pnm,
    to_grayscale,
)

from conftest import gray_image, random_image
from oracles import bilinear_resize_plane, clamp_crop_plane


class TestPnmCodec:
    def test_p5_decode(self):
        data = b"P5\n2 2\n255\n" + bytes([0, 128, 255, 64])
        img = load_pnm(data)
        assert img.channels == 1 and img.width == 2 and img.height == 2
        np.testing.assert_array_equal(
            img.plane(0), np.array([[0.0, 128 / 255], [1.0, 64 / 255]])
        )

    def test_p6_decode_planes(self):
        img = load_pnm(b"P6\n1 1\n255\n" + bytes([255, 0, 0]))
        assert img.channels == 3
        assert img.data[0, 0, 0] == 1.0
        assert img.data[1, 0, 0] == 0.0
        assert img.data[2, 0, 0] == 0.0

    def test_header_comments(self):
        data = b"P5 # format\n# a comment line\n2 1 # dims\n255\n" + bytes([10, 20])
        img = load_pnm(data)
        assert (img.width, img.height) == (2, 1)

    def test_zero_dimension_rejected(self):
        with pytest.raises(DecodeError, match="zero dimension"):
            load_pnm(b"P5\n0 0\n255\n")

    def test_bad_magic_names_offset(self):
        with pytest.raises(DecodeError, match="offset 0"):
            load_pnm(b"P7\n1 1\n255\n\x00")

    def test_unsupported_maxval(self):
        with pytest.raises(DecodeError, match="maxval"):
            load_pnm(b"P5\n1 1\n65535\n\x00\x00")

    def test_truncated_payload_names_offset(self):
        with pytest.raises(DecodeError, match="expected 4 bytes"):
            load_pnm(b"P5\n2 2\n255\n" + bytes([1, 2, 3]))

    def test_trailing_bytes_rejected(self):
        with pytest.raises(DecodeError, match="trailing"):
            load_pnm(b"P5\n1 1\n255\n" + bytes([1, 2]))

    def test_save_white_pixel(self):
        assert save_pnm(gray_image([[1.0]])).endswith(bytes([255]))

    def test_save_rounds_half_away_from_zero(self):
        # 0.5 * 255 = 127.5 -> 128
        assert save_pnm(gray_image([[0.5]])).endswith(bytes([128]))

    def test_round_trip_quantized_bit_exact(self, rng):
        levels = rng.integers(0, 256, (3, 5, 4))
        img = Image(levels / 255.0)
        data = save_pnm(img)
        again = save_pnm(load_pnm(data))
        assert data == again
        np.testing.assert_array_equal(load_pnm(data).data, img.data)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 6), st.integers(1, 6), st.booleans(), st.integers(0, 2**32 - 1))
    def test_round_trip_property(self, w, h, color, seed):
        rng = np.random.default_rng(seed)
        channels = 3 if color else 1
        img = Image(rng.integers(0, 256, (channels, h, w)) / 255.0)
        data = save_pnm(img)
        np.testing.assert_array_equal(load_pnm(data).data, img.data)


class TestResize:
    def test_constant_stays_constant(self):
        img = Image(np.full((3, 4, 5), 0.37))
        out = resize_bilinear(img, 9, 7)
        assert out.width == 9 and out.height == 7 and out.channels == 3
        np.testing.assert_allclose(out.data, 0.37, rtol=0, atol=1e-15)

    def test_single_pixel_replicates(self):
        out = resize_bilinear(gray_image([[0.25]]), 4, 4)
        np.testing.assert_array_equal(out.data, np.full((1, 4, 4), 0.25))

    def test_checker_2x2_to_3x3(self):
        img = gray_image([[0.0, 1.0], [1.0, 0.0]])
        out = resize_bilinear(img, 3, 3)
        expected = bilinear_resize_plane(img.plane(0), 3, 3)
        np.testing.assert_allclose(out.plane(0), expected, atol=1e-12)
        assert out.plane(0)[1, 1] == pytest.approx(0.5)
        assert out.plane(0)[0, 0] == 0.0 and out.plane(0)[2, 2] == 0.0
        assert out.plane(0)[0, 2] == 1.0 and out.plane(0)[2, 0] == 1.0

    def test_matches_oracle_random(self, rng):
        for _ in range(5):
            img = random_image(rng, channels=1, h=6, w=5)
            out = resize_bilinear(img, 8, 3)
            np.testing.assert_allclose(
                out.plane(0), bilinear_resize_plane(img.plane(0), 8, 3), atol=1e-12
            )


class TestCrop:
    def test_inside_box_is_plain_crop(self, rng):
        img = random_image(rng, h=6, w=7)
        out = crop_with_edge_pad(img, BBox(2, 1, 3, 4))
        np.testing.assert_array_equal(out.data, img.data[:, 1:5, 2:5])

    def test_full_box_is_identity(self, rng):
        img = random_image(rng, h=5, w=4)
        out = crop_with_edge_pad(img, BBox(0, 0, 4, 5))
        np.testing.assert_array_equal(out.data, img.data)

    def test_negative_x_clamps(self):
        img = gray_image([[0.1, 0.2], [0.3, 0.4]])
        out = crop_with_edge_pad(img, BBox(-1, 0, 2, 1))
        np.testing.assert_array_equal(out.plane(0), [[0.1, 0.1]])

    def test_matches_clamp_oracle_random(self, rng):
        img = random_image(rng, channels=1, h=8, w=8)
        for box in (BBox(-3, -2, 5, 4), BBox(6, 7, 4, 3), BBox(-10, -10, 3, 3)):
            out = crop_with_edge_pad(img, box)
            expected = clamp_crop_plane(img.plane(0), box.x, box.y, box.w, box.h)
            np.testing.assert_array_equal(out.plane(0), expected)


class TestFlipRotate:
    def test_flip_single_column_identity(self, rng):
        img = random_image(rng, h=4, w=1)
        np.testing.assert_array_equal(flip_horizontal(img).data, img.data)

    def test_flip_2x2(self):
        img = gray_image([[0.1, 0.2], [0.3, 0.4]])
        np.testing.assert_array_equal(
            flip_horizontal(img).plane(0), [[0.2, 0.1], [0.4, 0.3]]
        )

    @settings(max_examples=25, deadline=None)
    @given(st.integers(1, 6), st.integers(1, 6), st.integers(0, 2**32 - 1))
    def test_flip_involution(self, w, h, seed):
        img = Image(np.random.default_rng(seed).random((3, h, w)))
        np.testing.assert_array_equal(flip_horizontal(flip_horizontal(img)).data, img.data)

    def test_rotate_zero_identity(self, rng):
        img = random_image(rng)
        np.testing.assert_array_equal(rotate(img, 0.0).data, img.data)

    def test_rotate_constant(self):
        img = Image(np.full((1, 5, 5), 0.6))
        np.testing.assert_allclose(rotate(img, 3.0).data, 0.6, atol=1e-12)

    def test_rotate_center_fixed_point(self):
        arr = np.full((5, 5), 0.2)
        arr[2, 2] = 0.9
        out = rotate(gray_image(arr), 3.0)
        assert out.plane(0)[2, 2] == pytest.approx(0.9, abs=1e-12)

    def test_rotate_limit(self, rng):
        with pytest.raises(ShapeError):
            rotate(random_image(rng), 60.0)


class TestGrayscale:
    def test_gray_input_identity(self, rng):
        img = random_image(rng, channels=1)
        np.testing.assert_array_equal(to_grayscale(img).data, img.data)

    def test_white_stays_white(self):
        img = Image(np.ones((3, 2, 2)))
        np.testing.assert_allclose(to_grayscale(img).data, 1.0, atol=1e-12)

    def test_red_weight(self):
        img = Image(np.stack([np.ones((1, 1)), np.zeros((1, 1)), np.zeros((1, 1))]))
        assert to_grayscale(img).plane(0)[0, 0] == pytest.approx(0.299)


class TestRange:
    def test_all_ops_stay_in_unit_range(self, rng):
        for _ in range(10):
            img = random_image(rng, h=7, w=6)
            outputs = [
                resize_bilinear(img, 3, 9),
                crop_with_edge_pad(img, BBox(-2, -2, 9, 9)),
                flip_horizontal(img),
                rotate(img, 17.0),
                to_grayscale(img),
            ]
            for out in outputs:
                assert out.data.min() >= 0.0 and out.data.max() <= 1.0
