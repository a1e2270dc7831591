import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fakedet import (
    ITU601,
    ColorCoefficients,
    InvalidConfigError,
    InvalidInputError,
    rgb_to_ycbcr,
    ycbcr_to_rgb,
)


def oracle_ycbcr(img, coeffs=ITU601):
    """Direct per-pixel evaluation of the conversion definition."""
    r, g, b = img[..., 0], img[..., 1], img[..., 2]
    y = coeffs.k_ry * r + coeffs.k_gy * g + coeffs.k_by * b
    cb = (b - y) / (2.0 * (1.0 - coeffs.k_by))
    cr = (r - y) / (2.0 * (1.0 - coeffs.k_ry))
    return np.stack([y, cb, cr], axis=-1)


def test_matches_definition_oracle():
    rng = np.random.default_rng(0)
    img = rng.random((13, 9, 3))
    got = rgb_to_ycbcr(img)
    want = oracle_ycbcr(img)
    assert np.abs(got - want).max() < 1e-12


def test_itu601_coefficients():
    assert ITU601.k_ry == 0.299
    assert ITU601.k_by == 0.114
    assert abs(ITU601.k_gy - 0.587) < 1e-12
    assert abs(ITU601.k_ry + ITU601.k_gy + ITU601.k_by - 1.0) < 1e-15


def test_gray_pixel_has_zero_chroma():
    img = np.full((4, 4, 3), 0.5)
    out = rgb_to_ycbcr(img)
    assert np.allclose(out[..., 0], 0.5)
    assert (out[..., 1] == 0.0).all()
    assert (out[..., 2] == 0.0).all()


def test_gray_axis_exact_zero_chroma():
    # R=G=B at arbitrary levels maps to exactly zero chroma, no rounding slack
    rng = np.random.default_rng(1)
    level = rng.random((32, 32, 1))
    img = np.repeat(level, 3, axis=2)
    out = rgb_to_ycbcr(img)
    assert (out[..., 1] == 0.0).all()
    assert (out[..., 2] == 0.0).all()


def test_pure_red_values():
    img = np.zeros((1, 1, 3))
    img[..., 0] = 1.0
    y, cb, cr = rgb_to_ycbcr(img)[0, 0]
    assert abs(y - 0.299) < 1e-12
    assert abs(cr - (1.0 - 0.299) / 1.402) < 1e-12
    assert abs(cr - 0.5) < 1e-12
    assert abs(cb - (-0.299 / 1.772)) < 1e-12


def test_round_trip_over_many_images():
    rng = np.random.default_rng(2)
    worst = 0.0
    for _ in range(1000):
        img = rng.random((4, 6, 3))
        back = ycbcr_to_rgb(rgb_to_ycbcr(img))
        worst = max(worst, float(np.abs(back - img).max()))
    assert worst < 1e-6


def test_round_trip_inverse_of_red_example():
    ycbcr = np.array([[[0.299, -0.299 / 1.772, 0.5]]])
    rgb = ycbcr_to_rgb(ycbcr)
    assert np.abs(rgb - np.array([1.0, 0.0, 0.0])).max() < 1e-6


def test_zero_chroma_decodes_to_gray():
    ycbcr = np.zeros((2, 2, 3))
    ycbcr[..., 0] = 0.5
    rgb = ycbcr_to_rgb(ycbcr)
    assert np.allclose(rgb, 0.5)


def test_luma_stays_in_unit_range():
    rng = np.random.default_rng(3)
    img = rng.random((64, 64, 3))
    y = rgb_to_ycbcr(img)[..., 0]
    assert y.min() >= 0.0 and y.max() <= 1.0


@settings(max_examples=50, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_round_trip_property(seed):
    img = np.random.default_rng(seed).random((8, 8, 3))
    back = ycbcr_to_rgb(rgb_to_ycbcr(img))
    assert np.abs(back - img).max() < 1e-6


def test_chroma_swap_variant():
    # swapped literal form: Cb carries R - Y, Cr carries B - Y, unscaled
    img = np.zeros((1, 1, 3))
    img[..., 0] = 1.0
    y, cb, cr = rgb_to_ycbcr(img, chroma_swap=True)[0, 0]
    assert abs(y - 0.299) < 1e-12
    assert abs(cb - (1.0 - 0.299)) < 1e-12
    assert abs(cr - (0.0 - 0.299)) < 1e-12
    back = ycbcr_to_rgb(rgb_to_ycbcr(img, chroma_swap=True), chroma_swap=True)
    assert np.abs(back - img).max() < 1e-6


def test_wrong_channel_count_rejected():
    with pytest.raises(InvalidInputError):
        rgb_to_ycbcr(np.zeros((4, 4, 2)))
    with pytest.raises(InvalidInputError):
        ycbcr_to_rgb(np.zeros((4, 4, 4)))


def test_coefficient_constraints_checked_at_construction():
    with pytest.raises(InvalidConfigError):
        ColorCoefficients(k_ry=0.6, k_by=0.5)  # leaves no mass for green
    with pytest.raises(InvalidConfigError):
        ColorCoefficients(k_ry=-0.1, k_by=0.114)
    with pytest.raises(InvalidConfigError):
        ColorCoefficients(k_ry=float("nan"), k_by=0.114)
    coeffs = ColorCoefficients(k_ry=0.2126, k_by=0.0722)  # another standard's weights
    assert abs(coeffs.k_ry + coeffs.k_gy + coeffs.k_by - 1.0) < 1e-15
