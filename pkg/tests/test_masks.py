import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from PIL import Image

from mos.masks import (
    DegenerateMaskError,
    MaskFormatError,
    as_mask,
    as_scoremap,
    binarize,
    load_image,
    load_mask,
    load_scoremap,
    require_nondegenerate,
    save_mask,
    save_scoremap,
)


def _png(tmp_path, arr, name="m.png"):
    p = tmp_path / name
    Image.fromarray(np.asarray(arr, dtype=np.uint8)).save(p)
    return p


def test_load_mask_saturated_and_zero(tmp_path):
    assert load_mask(_png(tmp_path, np.full((4, 4), 255))).all()
    m = load_mask(_png(tmp_path, np.zeros((4, 4))))
    assert m.shape == (4, 4) and not m.any()


def test_load_mask_checkerboard(tmp_path):
    m = load_mask(_png(tmp_path, [[255, 0], [0, 255]]))
    np.testing.assert_array_equal(m, [[1, 0], [0, 1]])


def test_load_scoremap_scaling(tmp_path):
    assert np.all(load_scoremap(_png(tmp_path, np.full((3, 3), 255))) == 1.0)
    s = load_scoremap(_png(tmp_path, np.full((3, 3), 128)))
    np.testing.assert_allclose(s, 128 / 255)
    ramp = np.arange(256).reshape(1, -1)
    s = load_scoremap(_png(tmp_path, ramp))
    np.testing.assert_array_equal(s[0], ramp[0] / 255.0)
    assert np.all(np.diff(s[0]) >= 0)


def test_load_rejects_rgb_mask(tmp_path):
    p = tmp_path / "rgb.png"
    Image.fromarray(np.zeros((4, 4, 3), np.uint8)).save(p)
    with pytest.raises(MaskFormatError):
        load_mask(p)
    assert load_image(p).shape == (4, 4, 3)


def test_gray_image_loads_as_rgb(tmp_path):
    img = load_image(_png(tmp_path, np.arange(16).reshape(4, 4)))
    assert img.shape == (4, 4, 3)
    np.testing.assert_array_equal(img[..., 0], img[..., 2])


def test_binarize_examples():
    assert binarize(np.full((2, 2), 0.5), 0.5).all()
    assert not binarize(np.full((2, 2), 0.49), 0.5).any()
    np.testing.assert_array_equal(binarize(np.array([[0.2, 0.5, 0.8]])), [[0, 1, 1]])


def test_validation():
    with pytest.raises(ValueError):
        as_scoremap(np.array([[1.5]]))
    with pytest.raises(ValueError):
        as_scoremap(np.zeros((2, 2, 2)))
    with pytest.raises(ValueError):
        as_mask(np.array([[0, 2]]))
    with pytest.raises(DegenerateMaskError):
        require_nondegenerate(np.zeros((3, 3), bool))


@pytest.mark.parametrize("suffix", [".png", ".pgm"])
def test_round_trip_random(tmp_path, suffix):
    m = np.random.default_rng(0).random((64, 64)) < 0.5
    save_mask(m, tmp_path / f"m{suffix}")
    np.testing.assert_array_equal(load_mask(tmp_path / f"m{suffix}"), m)
    save_mask(np.ones((5, 7), bool), tmp_path / f"o{suffix}")
    assert load_mask(tmp_path / f"o{suffix}").all()


def test_pgm_is_binary_p5(tmp_path):
    save_mask(np.eye(3, dtype=bool), tmp_path / "e.pgm")
    assert (tmp_path / "e.pgm").read_bytes()[:2] == b"P5"


def test_large_round_trip(tmp_path):
    m = np.random.default_rng(1).random((4096, 4096)) < 0.3
    save_mask(m, tmp_path / "big.png")
    np.testing.assert_array_equal(load_mask(tmp_path / "big.png"), m)


def test_scoremap_round_trip_is_quantised(tmp_path):
    s = np.random.default_rng(2).integers(0, 256, (8, 8)) / 255.0
    save_scoremap(s, tmp_path / "s.png")
    np.testing.assert_array_equal(load_scoremap(tmp_path / "s.png"), s)


masks = arrays(np.bool_, st.tuples(st.integers(1, 12), st.integers(1, 12)))
thresholds = st.floats(min_value=1e-6, max_value=1.0)


@given(masks, thresholds)
def test_binarize_idempotent_on_masks(m, t):
    np.testing.assert_array_equal(binarize(m.astype(float), t), m)


@given(arrays(np.float64, (6, 6), elements=st.floats(0, 1)), thresholds, thresholds)
def test_binarize_monotone_in_threshold(s, t1, t2):
    lo, hi = sorted((t1, t2))
    assert not np.any(binarize(s, hi) & ~binarize(s, lo))


@settings(max_examples=30, deadline=None)
@given(masks)
def test_round_trip_property(tmp_path_factory, m):
    p = tmp_path_factory.mktemp("rt") / "m.png"
    save_mask(m, p)
    np.testing.assert_array_equal(load_mask(p), m)
