import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mos.metrics import iou, mba
from mos.morphology import dilate, erode
from mos.perturb import (
    PerturbError,
    PerturbSpec,
    apply,
    boundary_pixels,
    chunk_removal,
    dilate_perturb,
    erode_perturb,
    iou_target_perturb,
    match_chunk_to_iou,
    rng_for,
)
from oracles import disk, literal_iou


def test_rng_is_pcg64_and_stable():
    g = rng_for(0)
    assert isinstance(g.bit_generator, np.random.PCG64)
    ref = np.random.Generator(np.random.PCG64(np.random.SeedSequence(0))).random(4)
    np.testing.assert_array_equal(rng_for(0).random(4), ref)
    assert not np.array_equal(rng_for(0, 1).random(4), ref)


def test_boundary_pixels_of_square():
    m = np.zeros((6, 6), bool)
    m[1:5, 1:5] = True
    pts = boundary_pixels(m)
    assert len(pts) == 12
    assert all(m[r, c] for r, c in pts)


def test_radius_zero_is_identity():
    gt = disk(64, 20)
    np.testing.assert_array_equal(erode_perturb(gt, 0), gt)
    np.testing.assert_array_equal(dilate_perturb(gt, 0), gt)


def test_erode_disk_keeps_iou_but_hurts_mba():
    gt = disk(700, 300)
    out = erode_perturb(gt, 2)
    assert iou(out, gt) >= 0.97
    assert mba(out, gt) < 1.0


def test_opening_near_identity_on_disk():
    gt = disk(300, 120)
    for r in (1, 2, 4):
        assert iou(dilate_perturb(erode_perturb(gt, r), r), gt) >= 0.99


def test_erode_to_nothing_raises():
    gt = np.zeros((9, 9), bool)
    gt[4, 4] = True
    with pytest.raises(PerturbError):
        erode_perturb(gt, 1)
    with pytest.raises(PerturbError):
        dilate_perturb(gt, 20)


def test_chunk_removal_count_zero_identity():
    gt = disk(100, 30)
    np.testing.assert_array_equal(chunk_removal(gt, 10, 0, seed=1), gt)


def test_chunk_removal_deterministic_and_shrinking():
    gt = disk(200, 60)
    a = chunk_removal(gt, 15, 3, seed=11)
    b = chunk_removal(gt, 15, 3, seed=11)
    np.testing.assert_array_equal(a, b)
    assert a.sum() < gt.sum()
    assert not np.any(a & ~gt)
    assert not np.array_equal(a, chunk_removal(gt, 15, 3, seed=12))


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 40), st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_chunk_removal_strictly_decreases_area(d, count, seed):
    gt = disk(120, 40)
    out = chunk_removal(gt, d, count, seed)
    assert out.sum() < gt.sum()


def test_chunk_matched_to_erosion_dissociates_mba():
    gt = disk(512, 200)
    eroded = erode_perturb(gt, 2)
    target = iou(eroded, gt)
    chunked, d = match_chunk_to_iou(gt, target, seed=3)
    assert abs(iou(chunked, gt) - target) <= 0.01
    assert abs(mba(chunked, gt) - mba(eroded, gt)) >= 0.05
    np.testing.assert_array_equal(chunked, chunk_removal(gt, d, 1, seed=3))


def test_iou_target_identity_range():
    gt = disk(64, 20)
    np.testing.assert_array_equal(iou_target_perturb(gt, (1.0, 1.0), seed=5), gt)


@pytest.mark.parametrize("seed", range(20))
def test_iou_target_lands_in_range(seed):
    gt = disk(512, 180)
    out = iou_target_perturb(gt, (0.8, 1.0), seed=seed)
    assert 0.8 <= literal_iou(out, gt) <= 1.0


def test_iou_target_narrow_range_and_determinism():
    gt = disk(256, 90)
    a = iou_target_perturb(gt, (0.85, 0.9), seed=7)
    assert 0.85 <= iou(a, gt) <= 0.9
    np.testing.assert_array_equal(a, iou_target_perturb(gt, (0.85, 0.9), seed=7))


def test_iou_target_bad_range():
    with pytest.raises(ValueError):
        iou_target_perturb(disk(32, 10), (0.9, 0.8))
    with pytest.raises(ValueError):
        PerturbSpec("iou-target", iou_range=(0.9, 0.8))
    with pytest.raises(ValueError):
        PerturbSpec("blur")


def test_apply_dispatch():
    gt = disk(128, 40)
    np.testing.assert_array_equal(apply(gt, PerturbSpec("erode", radius=2)), erode(gt, 2))
    np.testing.assert_array_equal(apply(gt, PerturbSpec("dilate", radius=3)), dilate(gt, 3))
    np.testing.assert_array_equal(
        apply(gt, PerturbSpec("chunk-removal", chunk_diameter=9, count=2, seed=4)),
        chunk_removal(gt, 9, 2, seed=4),
    )
    out = apply(gt, PerturbSpec("iou-target", iou_range=(0.9, 0.95), seed=2))
    assert 0.9 <= iou(out, gt) <= 0.95
