import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from pwcc.errors import InvalidArgumentError, InvalidInputError, ShapeError
from pwcc.imagecore import apply_white_balance, from_log_chroma, g_normalize, resize_bilinear, to_log_chroma


@pytest.mark.parametrize("g", [0.0, 1e-3, 0.5, 1.0])
def test_gray_pixel_has_zero_chroma(g):
    uv = to_log_chroma(np.full((1, 1, 3), g))
    assert np.array_equal(uv, np.zeros((1, 1, 2)))


def test_log_chroma_of_red_pixel():
    uv = to_log_chroma(np.array([[[2.0, 1.0, 1.0]]]), 1e-6)
    assert uv[0, 0, 0] == pytest.approx(0.693147, abs=1e-5)
    assert uv[0, 0, 1] == pytest.approx(0.0, abs=1e-12)


def test_log_chroma_rejects_nan_and_names_pixel():
    img = np.ones((3, 4, 3))
    img[2, 1, 0] = np.nan
    with pytest.raises(InvalidInputError, match=r"y=2, x=1"):
        to_log_chroma(img)


def test_log_chroma_rejects_bad_epsilon():
    with pytest.raises(InvalidArgumentError):
        to_log_chroma(np.ones((1, 1, 3)), 0.0)


def test_from_log_chroma_identity_and_exp():
    assert np.array_equal(from_log_chroma(np.zeros((2, 2, 2))), np.ones((2, 2, 3)))
    g = from_log_chroma(np.array([[[np.log(2.0), -np.log(2.0)]]]))
    np.testing.assert_allclose(g[0, 0], [2.0, 1.0, 0.5], atol=1e-9)


def test_from_log_chroma_rejects_inf():
    with pytest.raises(InvalidInputError):
        from_log_chroma(np.array([[[np.inf, 0.0]]]))


def _eps_bias_bound(img, eps):
    # |(c + eps) / (g + eps) - c / g| = eps * |g - c| / (g * (g + eps))
    g = img[..., 1:2]
    return eps * np.abs(g - img) / (g * (g + eps))


def test_round_trip_random_image(rng):
    img = rng.uniform(1e-3, 1.0, size=(4, 4, 3))
    back = from_log_chroma(to_log_chroma(img, 1e-6))
    shifted = (img + 1e-6) / (img[..., 1:2] + 1e-6)
    np.testing.assert_allclose(back, shifted, rtol=1e-12)
    assert np.all(np.abs(back - g_normalize(img)) <= _eps_bias_bound(img, 1e-6) * (1 + 1e-9) + 1e-15)
    assert np.all(back[..., 1] == 1.0)


def test_round_trip_within_1e6_near_unit_chroma(rng):
    # the epsilon bias stays below 1e-6 when every channel is within 30% of G
    img = rng.uniform(0.7, 1.0, size=(4, 4, 3))
    back = from_log_chroma(to_log_chroma(img, 1e-6))
    np.testing.assert_allclose(back, g_normalize(img), atol=1e-6)


def test_gain_map_round_trip_is_g_normalized(rng):
    gains = rng.uniform(0.5, 1.9, size=(5, 6, 3))
    gains[..., 1] = 1.0
    back = from_log_chroma(to_log_chroma(gains))
    np.testing.assert_allclose(back, gains / gains[..., 1:2], atol=1e-6)


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, (3, 5, 3), elements=st.floats(1e-3, 1.0)))
def test_round_trip_property(img):
    back = from_log_chroma(to_log_chroma(img, 1e-6))
    assert np.all(np.abs(back - g_normalize(img)) <= _eps_bias_bound(img, 1e-6) * (1 + 1e-9) + 1e-12)
    # with a smaller epsilon the relative error drops below 1e-6 everywhere
    fine = from_log_chroma(to_log_chroma(img, 1e-10))
    np.testing.assert_allclose(fine, g_normalize(img), rtol=1e-6)
    assert np.all(back[..., 1] == 1.0)


def test_white_balance_identity_and_scalar():
    img = np.full((2, 3, 3), [0.25, 0.5, 0.5])
    assert np.array_equal(apply_white_balance(img, np.ones_like(img)), img)
    out = apply_white_balance(img, np.broadcast_to([2.0, 1.0, 1.0], img.shape))
    np.testing.assert_allclose(out, 0.5)


def test_white_balance_inverse(rng):
    img = rng.uniform(0, 1, (4, 4, 3))
    gains = rng.uniform(0.25, 4, (4, 4, 3))
    back = apply_white_balance(apply_white_balance(img, gains), 1.0 / gains)
    np.testing.assert_allclose(back, img, atol=1e-6)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.0, 10.0))
def test_white_balance_linear_in_image(a):
    rng = np.random.default_rng(3)
    img = rng.uniform(0, 1, (3, 3, 3))
    gains = rng.uniform(0.5, 2, (3, 3, 3))
    np.testing.assert_allclose(apply_white_balance(a * img, gains), a * apply_white_balance(img, gains), rtol=1e-12, atol=1e-300)


def test_white_balance_shape_mismatch():
    with pytest.raises(ShapeError):
        apply_white_balance(np.ones((2, 2, 3)), np.ones((2, 3, 3)))


def test_resize_identity_is_bit_identical(rng):
    img = rng.uniform(0, 1, (5, 7, 3))
    assert np.array_equal(resize_bilinear(img, 7, 5), img)


@pytest.mark.parametrize("size", [(1, 1), (3, 9), (16, 4)])
def test_resize_constant(size):
    out = resize_bilinear(np.full((4, 6, 3), 0.37), *size)
    assert out.shape == (size[1], size[0], 3)
    np.testing.assert_allclose(out, 0.37, atol=1e-15)


def _bilinear_oracle(img, new_w, new_h):
    h, w = img.shape[:2]
    out = np.zeros((new_h, new_w) + img.shape[2:])
    for j in range(new_h):
        for i in range(new_w):
            sy = min(max((j + 0.5) * h / new_h - 0.5, 0), h - 1)
            sx = min(max((i + 0.5) * w / new_w - 0.5, 0), w - 1)
            y0, x0 = int(np.floor(sy)), int(np.floor(sx))
            y1, x1 = min(y0 + 1, h - 1), min(x0 + 1, w - 1)
            fy, fx = sy - y0, sx - x0
            out[j, i] = ((1 - fy) * ((1 - fx) * img[y0, x0] + fx * img[y0, x1])
                         + fy * ((1 - fx) * img[y1, x0] + fx * img[y1, x1]))
    return out


def test_resize_two_pixel_row_matches_oracle():
    img = np.array([[[0.0, 0.0, 0.0], [1.0, 1.0, 1.0]]])
    out = resize_bilinear(img, 4, 1)
    np.testing.assert_allclose(out, _bilinear_oracle(img, 4, 1), atol=1e-6)
    np.testing.assert_allclose(out[0, :, 0], [0.0, 0.25, 0.75, 1.0], atol=1e-12)


def test_resize_random_matches_oracle(rng):
    img = rng.uniform(0, 1, (5, 7, 3))
    for size in [(3, 4), (11, 9), (7, 10)]:
        np.testing.assert_allclose(resize_bilinear(img, *size), _bilinear_oracle(img, *size), atol=1e-12)


def test_resize_zero_dimension():
    with pytest.raises(InvalidArgumentError):
        resize_bilinear(np.ones((2, 2, 3)), 0, 2)
