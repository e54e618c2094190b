import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import naive_bilateral, naive_gaussian_blur
from pwcc.bilateral import PAPER_DEFAULT, BilateralConfig, apply_postfilter, bilateral_filter, window_offsets
from pwcc.errors import InvalidArgumentError, InvalidInputError


def random_config(rng):
    return BilateralConfig(sigma_s=float(rng.uniform(0.5, 80)), sigma_r=float(rng.uniform(0.02, 1.0)),
                           diameter=int(rng.choice([1, 3, 5, 7, 9])))


def test_default_filter_constants():
    assert PAPER_DEFAULT.sigma_s == 75.0
    assert PAPER_DEFAULT.sigma_r == pytest.approx(75 / 255)
    assert PAPER_DEFAULT.diameter == 9


def test_window_is_disc():
    offs = window_offsets(9)
    assert len(offs) == 49
    assert (0, 4) in offs and (2, 3) in offs
    assert (3, 3) not in offs and (4, 4) not in offs
    assert window_offsets(1) == [(0, 0)]


@pytest.mark.parametrize("kw", [{"diameter": 4}, {"diameter": 0}, {"sigma_s": 0}, {"sigma_r": -1}, {"mode": "x"}])
def test_invalid_config(kw):
    with pytest.raises(InvalidArgumentError):
        bilateral_filter(np.ones((3, 3, 3)), BilateralConfig(**kw))


def test_non_finite_input():
    img = np.ones((4, 4, 3))
    img[1, 2, 0] = np.inf
    with pytest.raises(InvalidInputError):
        bilateral_filter(img)


def test_constant_image_unchanged():
    img = np.full((10, 7, 3), 0.37)
    out = bilateral_filter(img)
    assert np.max(np.abs(out - img)) <= 1e-12


def test_matches_brute_force_defaults():
    img = np.random.default_rng(0).uniform(size=(9, 9, 3))
    assert np.max(np.abs(bilateral_filter(img) - naive_bilateral(img, 75, 75 / 255, 9))) < 1e-5


def test_matches_brute_force_random_configs():
    rng = np.random.default_rng(42)
    worst = 0.0
    for _ in range(50):
        img = rng.uniform(0, 2, size=(16, 16, 3))
        cfg = random_config(rng)
        ref = naive_bilateral(img, cfg.sigma_s, cfg.sigma_r, cfg.diameter)
        worst = max(worst, np.max(np.abs(bilateral_filter(img, cfg) - ref)))
    assert worst < 1e-5


def test_channel_mode_matches_brute_force():
    img = np.random.default_rng(3).uniform(size=(8, 8, 3))
    cfg = BilateralConfig(sigma_s=3, sigma_r=0.2, diameter=5, mode="channel")
    ref = naive_bilateral(img, 3, 0.2, 5, joint=False)
    assert np.max(np.abs(bilateral_filter(img, cfg) - ref)) < 1e-5


def test_huge_range_sigma_is_gaussian_blur():
    img = np.random.default_rng(1).uniform(size=(12, 12, 3))
    cfg = BilateralConfig(sigma_s=2.0, sigma_r=1e6, diameter=7)
    assert np.max(np.abs(bilateral_filter(img, cfg) - naive_gaussian_blur(img, 2.0, 7))) < 1e-4


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_output_within_window_min_max(seed):
    rng = np.random.default_rng(seed)
    img = rng.uniform(size=(10, 10, 3))
    cfg = random_config(rng)
    out = bilateral_filter(img, cfg)
    r = cfg.diameter // 2
    for y in range(10):
        for x in range(10):
            win = img[max(0, y - r):y + r + 1, max(0, x - r):x + r + 1].reshape(-1, 3)
            assert np.all(out[y, x] >= win.min(axis=0) - 1e-12)
            assert np.all(out[y, x] <= win.max(axis=0) + 1e-12)


def step_pattern(h=16, w=16, height=1.0):
    img = np.full((h, w, 3), 0.2)
    img[:, w // 2:] += height
    return img


def test_edge_preservation_beats_gaussian_blur():
    img = step_pattern(height=1.0)
    cfg = BilateralConfig(sigma_s=3.0, sigma_r=0.1, diameter=9)
    bil = bilateral_filter(img, cfg)
    gauss = naive_gaussian_blur(img, 3.0, 9)
    far = np.abs(np.arange(16) - 7.5) >= 2.5  # columns >= 2 px from the edge
    assert np.max(np.abs(bil - img)[:, far]) < np.max(np.abs(gauss - img)[:, far])


def test_postfilter_uniform_map_identity():
    m = np.broadcast_to([1.3, 1.0, 0.8], (8, 8, 3)).copy()
    out = apply_postfilter(m)
    assert np.max(np.abs(out - m)) <= 1e-12
    assert np.all(out[..., 1] == 1.0)


def test_postfilter_reanchors_g(rng):
    m = rng.uniform(0.5, 2.0, size=(8, 8, 3))
    out = apply_postfilter(m, BilateralConfig(sigma_s=2, sigma_r=0.3, diameter=5))
    assert np.all(out[..., 1] == 1.0)


def test_postfilter_keeps_edge_position():
    m = np.ones((12, 12, 3))
    m[:, 5:, 0] = 1.8
    m[:, 5:, 2] = 0.6
    before = np.argmax(np.abs(np.diff(m[..., 0], axis=1)), axis=1)
    out = apply_postfilter(m)
    after = np.argmax(np.abs(np.diff(out[..., 0], axis=1)), axis=1)
    assert np.array_equal(before, after)
